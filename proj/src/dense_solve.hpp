// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <vector>

namespace hejd::detail {

/// LU factorization of an equilibrated square system, reusable across
/// right-hand sides.
class EquilibratedLu {
public:
    /// Throws SingularSystemError when the equilibrated condition estimate
    /// exceeds max_condition or the matrix holds a non-finite entry.
    explicit EquilibratedLu(const Eigen::MatrixXd& a, double max_condition = 1e14);

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

    /// ||A x - b||_inf / ||b||_inf on the unscaled system (0 when b = 0 and x = 0).
    double relative_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& rhs) const;

    double rcond() const noexcept { return rcond_; }

private:
    Eigen::MatrixXd a_;
    Eigen::VectorXd row_scale_;
    Eigen::VectorXd col_scale_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    double rcond_ = 0.0;
};

inline std::vector<double> to_std(const Eigen::VectorXd& v, Eigen::Index offset, Eigen::Index count) {
    return std::vector<double>(v.data() + offset, v.data() + offset + count);
}

}  // namespace hejd::detail
