// SPDX-License-Identifier: Apache-2.0
#include "dense_solve.hpp"

#include "hejd/errors.hpp"

#include <cmath>
#include <sstream>

namespace hejd::detail {

EquilibratedLu::EquilibratedLu(const Eigen::MatrixXd& a, double max_condition) : a_(a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw SingularSystemError("system matrix must be square and non-empty");
    }
    if (!a.allFinite()) throw SingularSystemError("system matrix has non-finite entries");

    const Eigen::Index n = a.rows();
    row_scale_ = Eigen::VectorXd::Ones(n);
    col_scale_ = Eigen::VectorXd::Ones(n);
    Eigen::MatrixXd scaled = a;
    // Row then column max-norm scaling; exact powers of two keep the scaling
    // itself free of rounding.
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = scaled.row(i).cwiseAbs().maxCoeff();
        if (m == 0.0) throw SingularSystemError("system matrix has a zero row");
        row_scale_(i) = std::exp2(-std::ilogb(m));
        scaled.row(i) *= row_scale_(i);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        const double m = scaled.col(j).cwiseAbs().maxCoeff();
        if (m == 0.0) throw SingularSystemError("system matrix has a zero column");
        col_scale_(j) = std::exp2(-std::ilogb(m));
        scaled.col(j) *= col_scale_(j);
    }
    lu_.compute(scaled);
    rcond_ = lu_.rcond();
    if (!(rcond_ * max_condition >= 1.0)) {
        std::ostringstream os;
        os << "system is near-singular (condition estimate " << 1.0 / rcond_ << ")";
        throw SingularSystemError(os.str());
    }
}

Eigen::VectorXd EquilibratedLu::solve(const Eigen::VectorXd& rhs) const {
    const Eigen::VectorXd y = lu_.solve(row_scale_.cwiseProduct(rhs));
    return col_scale_.cwiseProduct(y);
}

double EquilibratedLu::relative_residual(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& rhs) const {
    const double num = (a_ * x - rhs).cwiseAbs().maxCoeff();
    const double den = rhs.cwiseAbs().maxCoeff();
    if (den == 0.0) return num;
    return num / den;
}

}  // namespace hejd::detail
