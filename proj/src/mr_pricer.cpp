// SPDX-License-Identifier: Apache-2.0
#include "hejd/mr_pricer.hpp"

#include "dense_solve.hpp"
#include "hejd/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hejd {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kBarrierGap = 1e-9;  // L = K is replaced by K (1 - kBarrierGap)

// (1 - e^{-a d}) / a, stable for a -> 0.
double one_minus_exp_over(double a, double d) noexcept {
    if (a == 0.0) return d;
    return -std::expm1(-a * d) / a;
}

double sum_exp(std::span<const double> coef, std::span<const double> rates, double dx) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < coef.size(); ++i) s += coef[i] * std::exp(rates[i] * dx);
    return s;
}

double sum_exp_slope(std::span<const double> coef, std::span<const double> rates,
                     double dx) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < coef.size(); ++i) {
        s += coef[i] * rates[i] * std::exp(rates[i] * dx);
    }
    return s;
}

std::string fmt_theta(double theta) {
    std::ostringstream os;
    os.precision(17);
    os << theta;
    return os.str();
}

void check_theta(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta)) {
        throw ModelError("randomization intensity theta must be finite and > 0");
    }
}

// Sizes shared by both systems.
struct Dims {
    Eigen::Index m;
    Eigen::Index n;
};

Dims dims_of(const HejdModel& model) {
    return {static_cast<Eigen::Index>(model.active_up().size()),
            static_cast<Eigen::Index>(model.active_down().size())};
}

}  // namespace

// ---------------------------------------------------------------------------
// European

double MrEuropeanSolution::particular(double log_x) const noexcept {
    return theta * (std::exp(log_x) / (delta + theta) - strike / (r + theta));
}

double MrEuropeanSolution::value_log(double x) const noexcept {
    if (has_lower_region && x < log_barrier) {
        return sum_exp(a_plus, knocked_roots.betas, x - log_barrier);
    }
    if (x <= log_strike) {
        return sum_exp(b_plus, roots.betas, x - b_plus_anchor) +
               sum_exp(b_minus, roots.gammas, x - b_minus_anchor);
    }
    return sum_exp(c_minus, roots.gammas, x - log_strike) + particular(x);
}

double MrEuropeanSolution::slope_log(double x) const noexcept {
    if (has_lower_region && x < log_barrier) {
        return sum_exp_slope(a_plus, knocked_roots.betas, x - log_barrier);
    }
    if (x <= log_strike) {
        return sum_exp_slope(b_plus, roots.betas, x - b_plus_anchor) +
               sum_exp_slope(b_minus, roots.gammas, x - b_minus_anchor);
    }
    return sum_exp_slope(c_minus, roots.gammas, x - log_strike) +
           theta * std::exp(x) / (delta + theta);
}

MrEuropeanSolution solve_european_mr(const HejdModel& model, const DownOutStepSpec& spec,
                                     double theta) {
    spec.validate();
    check_theta(theta);
    if (!(spec.strike > 0.0)) throw ModelError("strike K must be > 0");

    MrEuropeanSolution sol;
    sol.theta = theta;
    sol.r = model.r();
    sol.delta = model.delta();
    sol.strike = spec.strike;
    sol.has_lower_region = spec.barrier > 0.0;
    sol.barrier = spec.barrier;
    if (sol.has_lower_region && spec.barrier > spec.strike * (1.0 - kBarrierGap)) {
        sol.barrier = spec.strike * (1.0 - kBarrierGap);
    }
    sol.log_strike = std::log(sol.strike);
    sol.log_barrier = sol.has_lower_region ? std::log(sol.barrier)
                                           : -std::numeric_limits<double>::infinity();
    sol.b_plus_anchor = sol.log_strike;
    sol.b_minus_anchor = sol.has_lower_region ? sol.log_barrier : sol.log_strike;

    const double alpha = model.r() + theta;
    sol.roots = find_roots(model, alpha);
    if (sol.has_lower_region) sol.knocked_roots = find_roots(model, alpha - spec.knock_rate);

    const auto up = model.active_up();
    const auto down = model.active_down();
    const auto [m, n] = dims_of(model);
    const auto& beta = sol.roots.betas;
    const auto& gamma = sol.roots.gammas;

    const double ek = sol.strike;
    const double tk_r = theta * ek / alpha;                 // theta e^k / (r + theta)
    const double tk_d = theta * ek / (model.delta() + theta);  // theta e^k / (delta + theta)

    if (!sol.has_lower_region) {
        // Unknowns (B+ anchored at k, C-); rows: m xi-rows, n eta-rows, value
        // and slope at k.
        const Eigen::Index size = m + n + 2;
        MatrixXd q = MatrixXd::Zero(size, size);
        VectorXd rhs = VectorXd::Zero(size);
        const Eigen::Index ob = 0;
        const Eigen::Index oc = m + 1;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double xi = up[i].rate;
            for (Eigen::Index s = 0; s <= m; ++s) q(i, ob + s) = -1.0 / (xi - beta[s]);
            for (Eigen::Index u = 0; u <= n; ++u) q(i, oc + u) = 1.0 / (xi - gamma[u]);
            rhs(i) = tk_r / xi - tk_d / (xi - 1.0);
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Index row = m + j;
            const double eta = down[j].rate;
            for (Eigen::Index s = 0; s <= m; ++s) q(row, ob + s) = 1.0 / (eta + beta[s]);
            for (Eigen::Index u = 0; u <= n; ++u) q(row, oc + u) = -1.0 / (eta + gamma[u]);
            rhs(row) = -tk_r / eta + tk_d / (eta + 1.0);
        }
        const Eigen::Index rv = m + n;
        const Eigen::Index rs = m + n + 1;
        for (Eigen::Index s = 0; s <= m; ++s) {
            q(rv, ob + s) = 1.0;
            q(rs, ob + s) = beta[s];
        }
        for (Eigen::Index u = 0; u <= n; ++u) {
            q(rv, oc + u) = -1.0;
            q(rs, oc + u) = -gamma[u];
        }
        rhs(rv) = tk_d - tk_r;
        rhs(rs) = tk_d;

        detail::EquilibratedLu lu(q);
        const VectorXd v = lu.solve(rhs);
        sol.system_residual = lu.relative_residual(v, rhs);
        sol.rcond = lu.rcond();
        sol.b_plus = detail::to_std(v, ob, m + 1);
        sol.b_minus.assign(static_cast<std::size_t>(n + 1), 0.0);
        sol.c_minus = detail::to_std(v, oc, n + 1);
        return sol;
    }

    const auto& beta_k = sol.knocked_roots.betas;
    const double d = sol.log_strike - sol.log_barrier;

    // Unknowns (A+, B+, B-, C-); rows: xi-rows below L, xi-rows on [L, K],
    // eta-rows on [L, K], eta-rows above K, value at L, value at K, slope at L,
    // slope at K. With d = k - l, eb = e^{-beta d} and eg = e^{gamma d} are the
    // middle-region exponentials at their far ends, both in (0, 1].
    const Eigen::Index size = 2 * m + 2 * n + 4;
    const Eigen::Index oa = 0;
    const Eigen::Index ob = m + 1;
    const Eigen::Index og = 2 * m + 2;
    const Eigen::Index oc = 2 * m + n + 3;
    MatrixXd q = MatrixXd::Zero(size, size);
    VectorXd rhs = VectorXd::Zero(size);
    std::vector<double> eb(static_cast<std::size_t>(m + 1));
    std::vector<double> eg(static_cast<std::size_t>(n + 1));
    for (Eigen::Index s = 0; s <= m; ++s) eb[static_cast<std::size_t>(s)] = std::exp(-beta[s] * d);
    for (Eigen::Index u = 0; u <= n; ++u) eg[static_cast<std::size_t>(u)] = std::exp(gamma[u] * d);
    auto eb_at = [&](Eigen::Index s) { return eb[static_cast<std::size_t>(s)]; };
    auto eg_at = [&](Eigen::Index u) { return eg[static_cast<std::size_t>(u)]; };

    for (Eigen::Index i = 0; i < m; ++i) {
        const double xi = up[i].rate;
        const double exi = std::exp(-xi * d);
        for (Eigen::Index s = 0; s <= m; ++s) {
            q(i, oa + s) = -1.0 / (xi - beta_k[s]);
            q(i, ob + s) = eb_at(s) * one_minus_exp_over(xi - beta[s], d);
        }
        for (Eigen::Index u = 0; u <= n; ++u) {
            q(i, og + u) = one_minus_exp_over(xi - gamma[u], d);
            q(i, oc + u) = exi / (xi - gamma[u]);
        }
        rhs(i) = exi * (tk_r / xi - tk_d / (xi - 1.0));

        const Eigen::Index row = m + i;
        for (Eigen::Index s = 0; s <= m; ++s) q(row, ob + s) = -1.0 / (xi - beta[s]);
        for (Eigen::Index u = 0; u <= n; ++u) {
            q(row, og + u) = -eg_at(u) / (xi - gamma[u]);
            q(row, oc + u) = 1.0 / (xi - gamma[u]);
        }
        rhs(row) = tk_r / xi - tk_d / (xi - 1.0);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        const double eta = down[j].rate;
        const double eeta = std::exp(-eta * d);
        const Eigen::Index row3 = 2 * m + j;
        for (Eigen::Index s = 0; s <= m; ++s) {
            q(row3, oa + s) = 1.0 / (eta + beta_k[s]);
            q(row3, ob + s) = -eb_at(s) / (eta + beta[s]);
        }
        for (Eigen::Index u = 0; u <= n; ++u) q(row3, og + u) = -1.0 / (eta + gamma[u]);

        const Eigen::Index row4 = 2 * m + n + j;
        for (Eigen::Index s = 0; s <= m; ++s) {
            q(row4, oa + s) = eeta / (eta + beta_k[s]);
            q(row4, ob + s) = one_minus_exp_over(eta + beta[s], d);
        }
        for (Eigen::Index u = 0; u <= n; ++u) {
            q(row4, og + u) = eg_at(u) * one_minus_exp_over(eta + gamma[u], d);
            q(row4, oc + u) = -1.0 / (eta + gamma[u]);
        }
        rhs(row4) = -tk_r / eta + tk_d / (eta + 1.0);
    }

    const Eigen::Index r_vl = 2 * m + 2 * n;
    const Eigen::Index r_vk = r_vl + 1;
    const Eigen::Index r_sl = r_vl + 2;
    const Eigen::Index r_sk = r_vl + 3;
    for (Eigen::Index s = 0; s <= m; ++s) {
        q(r_vl, oa + s) = 1.0;
        q(r_vl, ob + s) = -eb_at(s);
        q(r_vk, ob + s) = 1.0;
        q(r_sl, oa + s) = beta_k[s];
        q(r_sl, ob + s) = -beta[s] * eb_at(s);
        q(r_sk, ob + s) = beta[s];
    }
    for (Eigen::Index u = 0; u <= n; ++u) {
        q(r_vl, og + u) = -1.0;
        q(r_vk, og + u) = eg_at(u);
        q(r_vk, oc + u) = -1.0;
        q(r_sl, og + u) = -gamma[u];
        q(r_sk, og + u) = gamma[u] * eg_at(u);
        q(r_sk, oc + u) = -gamma[u];
    }
    rhs(r_vk) = tk_d - tk_r;
    rhs(r_sk) = tk_d;

    detail::EquilibratedLu lu(q);
    const VectorXd v = lu.solve(rhs);
    sol.system_residual = lu.relative_residual(v, rhs);
    sol.rcond = lu.rcond();
    sol.a_plus = detail::to_std(v, oa, m + 1);
    sol.b_plus = detail::to_std(v, ob, m + 1);
    sol.b_minus = detail::to_std(v, og, n + 1);
    sol.c_minus = detail::to_std(v, oc, n + 1);
    return sol;
}

double eval_european_mr(const MrEuropeanSolution& sol, double x) {
    if (!(x > 0.0)) return 0.0;
    return sol.value_log(std::log(x));
}

// ---------------------------------------------------------------------------
// American

namespace {

// x - K - Euro(x) for x >= K:  delta e^x/(delta+theta) - r K/(r+theta) - sum C e^{gamma (x-k)}.
double gap_value(const MrEuropeanSolution& e, double x) noexcept {
    return e.delta * std::exp(x) / (e.delta + e.theta) - e.r * e.strike / (e.r + e.theta) -
           sum_exp(e.c_minus, e.roots.gammas, x - e.log_strike);
}

double gap_slope(const MrEuropeanSolution& e, double x) noexcept {
    return e.delta * std::exp(x) / (e.delta + e.theta) -
           sum_exp_slope(e.c_minus, e.roots.gammas, x - e.log_strike);
}

double gap_scale(const MrEuropeanSolution& e, double x) noexcept {
    double s = e.delta * std::exp(x) / (e.delta + e.theta);
    for (std::size_t u = 0; u < e.c_minus.size(); ++u) {
        const double g = e.roots.gammas[u];
        s += std::abs(e.c_minus[u] * g) * std::exp(g * (x - e.log_strike));
    }
    return s;
}

// Q_A w = q_A at a candidate log-boundary b, with q_A split into its
// diffusion (value row at b) and jump (xi-rows) parts.
struct AmericanSystem {
    MatrixXd q;
    VectorXd rhs_diffusion;
    VectorXd rhs_jump;
    Eigen::Index od = 0;  // D+ offset (absent when L = 0)
    Eigen::Index of = 0;  // F+ offset
    Eigen::Index og = 0;  // F- offset (absent when L = 0)
    double f_plus_anchor = 0.0;
    double f_minus_anchor = 0.0;
};

AmericanSystem assemble_american(const HejdModel& model, const MrEuropeanSolution& e, double b) {
    const auto up = model.active_up();
    const auto down = model.active_down();
    const auto [m, n] = dims_of(model);
    const auto& beta = e.roots.betas;
    const auto& gamma = e.roots.gammas;

    // Jump-row payoff integrals over the stopping region [b, inf).
    auto xi_rhs = [&](double xi) {
        double s = e.r * e.strike / (xi * (e.r + e.theta)) -
                   e.delta * std::exp(b) / ((xi - 1.0) * (e.delta + e.theta));
        for (std::size_t u = 0; u < e.c_minus.size(); ++u) {
            s += e.c_minus[u] * std::exp(gamma[u] * (b - e.log_strike)) / (xi - gamma[u]);
        }
        return s;
    };

    AmericanSystem sys;
    if (!e.has_lower_region) {
        // Unknowns F+ anchored at b; rows: m xi-rows, value at b.
        const Eigen::Index size = m + 1;
        sys.q = MatrixXd::Zero(size, size);
        sys.rhs_diffusion = VectorXd::Zero(size);
        sys.rhs_jump = VectorXd::Zero(size);
        sys.f_plus_anchor = b;
        sys.f_minus_anchor = b;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double xi = up[i].rate;
            for (Eigen::Index s = 0; s <= m; ++s) sys.q(i, s) = -1.0 / (xi - beta[s]);
            sys.rhs_jump(i) = xi_rhs(xi);
        }
        for (Eigen::Index s = 0; s <= m; ++s) sys.q(m, s) = 1.0;
        sys.rhs_diffusion(m) = gap_value(e, b);
        return sys;
    }

    // F+ is anchored at b and F- at l, so with d = b - l >= 0 every entry is
    // bounded by one in magnitude.
    const auto& beta_k = e.knocked_roots.betas;
    const double d = b - e.log_barrier;
    const Eigen::Index size = 2 * m + n + 3;
    sys.od = 0;
    sys.of = m + 1;
    sys.og = 2 * m + 2;
    sys.f_plus_anchor = b;
    sys.f_minus_anchor = e.log_barrier;
    sys.q = MatrixXd::Zero(size, size);
    sys.rhs_diffusion = VectorXd::Zero(size);
    sys.rhs_jump = VectorXd::Zero(size);
    auto& q = sys.q;

    for (Eigen::Index i = 0; i < m; ++i) {
        const double xi = up[i].rate;
        const double exi = std::exp(-xi * d);
        for (Eigen::Index s = 0; s <= m; ++s) {
            q(i, sys.od + s) = -1.0 / (xi - beta_k[s]);
            q(i, sys.of + s) = std::exp(-beta[s] * d) * one_minus_exp_over(xi - beta[s], d);
        }
        for (Eigen::Index u = 0; u <= n; ++u) {
            q(i, sys.og + u) = one_minus_exp_over(xi - gamma[u], d);
        }
        const double jr = xi_rhs(xi);
        sys.rhs_jump(i) = exi * jr;

        const Eigen::Index row = m + i;
        for (Eigen::Index s = 0; s <= m; ++s) {
            q(row, sys.of + s) = -1.0 / (xi - beta[s]);
        }
        for (Eigen::Index u = 0; u <= n; ++u) {
            q(row, sys.og + u) = -std::exp(gamma[u] * d) / (xi - gamma[u]);
        }
        sys.rhs_jump(row) = jr;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        const double eta = down[j].rate;
        const Eigen::Index row = 2 * m + j;
        for (Eigen::Index s = 0; s <= m; ++s) {
            q(row, sys.od + s) = 1.0 / (eta + beta_k[s]);
            q(row, sys.of + s) = -std::exp(-beta[s] * d) / (eta + beta[s]);
        }
        for (Eigen::Index u = 0; u <= n; ++u) q(row, sys.og + u) = -1.0 / (eta + gamma[u]);
    }
    const Eigen::Index r_vl = 2 * m + n;
    const Eigen::Index r_vb = r_vl + 1;
    const Eigen::Index r_sl = r_vl + 2;
    for (Eigen::Index s = 0; s <= m; ++s) {
        const double eb = std::exp(-beta[s] * d);
        q(r_vl, sys.od + s) = 1.0;
        q(r_vl, sys.of + s) = -eb;
        q(r_vb, sys.of + s) = 1.0;
        q(r_sl, sys.od + s) = beta_k[s];
        q(r_sl, sys.of + s) = -beta[s] * eb;
    }
    for (Eigen::Index u = 0; u <= n; ++u) {
        q(r_vl, sys.og + u) = -1.0;
        q(r_vb, sys.og + u) = std::exp(gamma[u] * d);
        q(r_sl, sys.og + u) = -gamma[u];
    }
    sys.rhs_diffusion(r_vb) = gap_value(e, b);
    return sys;
}

EepCoefficients unpack(const AmericanSystem& sys, const VectorXd& w, Eigen::Index m,
                       Eigen::Index n, bool has_lower) {
    EepCoefficients c;
    if (has_lower) {
        c.d_plus = detail::to_std(w, sys.od, m + 1);
        c.f_plus = detail::to_std(w, sys.of, m + 1);
        c.f_minus = detail::to_std(w, sys.og, n + 1);
    } else {
        c.f_plus = detail::to_std(w, 0, m + 1);
        c.f_minus.assign(static_cast<std::size_t>(n + 1), 0.0);
    }
    return c;
}

// Continuation-region EEP in log-price for one coefficient set.
double eep_branch(const MrAmericanSolution& a, const EepCoefficients& c, double x) noexcept {
    const auto& e = a.euro;
    if (e.has_lower_region && x < e.log_barrier) {
        return sum_exp(c.d_plus, e.knocked_roots.betas, x - e.log_barrier);
    }
    return sum_exp(c.f_plus, e.roots.betas, x - a.f_plus_anchor) +
           sum_exp(c.f_minus, e.roots.gammas, x - a.f_minus_anchor);
}

double eep_branch_slope(const MrAmericanSolution& a, const EepCoefficients& c,
                        double x) noexcept {
    const auto& e = a.euro;
    if (e.has_lower_region && x < e.log_barrier) {
        return sum_exp_slope(c.d_plus, e.knocked_roots.betas, x - e.log_barrier);
    }
    return sum_exp_slope(c.f_plus, e.roots.betas, x - a.f_plus_anchor) +
           sum_exp_slope(c.f_minus, e.roots.gammas, x - a.f_minus_anchor);
}

struct BoundaryProbe {
    double residual = 0.0;  // normalized smooth-fit residual
    bool ok = false;
};

double smooth_fit_at(const HejdModel& model, const MrEuropeanSolution& e, double b) {
    const AmericanSystem sys = assemble_american(model, e, b);
    const detail::EquilibratedLu lu(sys.q);
    const VectorXd w = lu.solve(sys.rhs_diffusion + sys.rhs_jump);
    const auto [m, n] = dims_of(model);
    const EepCoefficients c = unpack(sys, w, m, n, e.has_lower_region);
    const double lhs = sum_exp_slope(c.f_plus, e.roots.betas, b - sys.f_plus_anchor) +
                       sum_exp_slope(c.f_minus, e.roots.gammas, b - sys.f_minus_anchor);
    return (lhs - gap_slope(e, b)) / gap_scale(e, b);
}

BoundaryProbe probe(const HejdModel& model, const MrEuropeanSolution& e, double b) {
    try {
        const double r = smooth_fit_at(model, e, b);
        return {r, std::isfinite(r)};
    } catch (const SingularSystemError&) {
        return {};
    }
}

std::string fmt_spot(double log_spot) {
    std::ostringstream os;
    os.precision(10);
    os << std::exp(log_spot);
    return os.str();
}

double find_log_boundary(const HejdModel& model, const MrEuropeanSolution& e,
                         const BoundarySearchConfig& cfg) {
    const double lo = std::log(e.strike * (1.0 + cfg.lower_rel));
    const int points = std::max(cfg.scan_points, 2);
    for (double span = cfg.initial_log_span;; span *= 2.0) {
        span = std::min(span, cfg.max_log_span);
        const double hi = e.log_strike + span;

        std::vector<std::pair<double, double>> crossings;
        double prev_u = lo;
        BoundaryProbe prev = probe(model, e, lo);
        if (!prev.ok) {
            throw NoBoundaryError("smooth-fit residual not computable at the strike (theta = " +
                                  fmt_theta(e.theta) + ")");
        }
        if (prev.residual == 0.0) return lo;
        for (int j = 1; j < points; ++j) {
            const double u = lo + (hi - lo) * j / (points - 1);
            const BoundaryProbe cur = probe(model, e, u);
            if (!cur.ok) break;  // overflow of the boundary exponentials caps the bracket
            if ((cur.residual < 0.0) != (prev.residual < 0.0) || cur.residual == 0.0) {
                crossings.emplace_back(prev_u, u);
            }
            prev_u = u;
            prev = cur;
        }
        if (crossings.size() > 1) {
            std::ostringstream os;
            os << "smooth-fit residual changes sign " << crossings.size()
               << " times (theta = " << fmt_theta(e.theta) << ") near spots";
            for (const auto& c : crossings) os << " " << fmt_spot(c.second);
            throw NoBoundaryError(os.str());
        }
        if (crossings.size() == 1) {
            auto f = [&](double u) { return smooth_fit_at(model, e, u); };
            boost::math::tools::eps_tolerance<double> tol(52);
            std::uintmax_t iters = 200;
            const auto [a, b] = boost::math::tools::toms748_solve(
                f, crossings[0].first, crossings[0].second, tol, iters);
            return std::abs(f(a)) <= std::abs(f(b)) ? a : b;
        }
        if (span >= cfg.max_log_span) break;
    }
    throw NoBoundaryError("smooth-fit residual has no sign change up to K e^" +
                          fmt_theta(cfg.max_log_span) + " (theta = " + fmt_theta(e.theta) + ")");
}

}  // namespace

std::vector<double> EepCoefficients::flat() const {
    std::vector<double> out(d_plus);
    out.insert(out.end(), f_plus.begin(), f_plus.end());
    out.insert(out.end(), f_minus.begin(), f_minus.end());
    return out;
}

double MrAmericanSolution::exercise_gap_log(double x) const noexcept { return gap_value(euro, x); }

EepSplit MrAmericanSolution::eep_log(double x) const noexcept {
    if (x > log_boundary) {
        const double g = gap_value(euro, x);
        return {g, 0.0, g};
    }
    if (x == log_boundary) {
        const double g = gap_value(euro, x);
        return {g, g, 0.0};
    }
    return {eep_branch(*this, total, x), eep_branch(*this, diffusion, x),
            eep_branch(*this, jump, x)};
}

EepSplit MrAmericanSolution::continued_eep_log(double x) const noexcept {
    return {eep_branch(*this, total, x), eep_branch(*this, diffusion, x),
            eep_branch(*this, jump, x)};
}

double MrAmericanSolution::eep_slope_log(double x) const noexcept {
    if (x >= log_boundary) return gap_slope(euro, x);
    return eep_branch_slope(*this, total, x);
}

double MrAmericanSolution::value_log(double x) const noexcept {
    if (x >= log_boundary) return std::exp(x) - euro.strike;
    return euro.value_log(x) + eep_branch(*this, total, x);
}

double smooth_fit_residual(const HejdModel& model, const MrEuropeanSolution& euro,
                           double boundary) {
    return smooth_fit_at(model, euro, std::log(boundary));
}

MrAmericanSolution solve_american_mr(const HejdModel& model, const DownOutStepSpec& spec,
                                     double theta, const BoundarySearchConfig& search) {
    return solve_american_mr(model, spec, solve_european_mr(model, spec, theta), search);
}

MrAmericanSolution solve_american_mr(const HejdModel& model, const DownOutStepSpec& spec,
                                     MrEuropeanSolution euro, const BoundarySearchConfig& search) {
    spec.validate();
    if (!(model.delta() > 0.0)) {
        throw NoBoundaryError("early exercise requires delta > 0 (stopping region is empty)");
    }
    MrAmericanSolution sol;
    sol.euro = std::move(euro);
    const double b = find_log_boundary(model, sol.euro, search);
    sol.log_boundary = b;
    sol.boundary = std::exp(b);

    const AmericanSystem sys = assemble_american(model, sol.euro, b);
    sol.f_plus_anchor = sys.f_plus_anchor;
    sol.f_minus_anchor = sys.f_minus_anchor;
    const detail::EquilibratedLu lu(sys.q);
    const VectorXd rhs = sys.rhs_diffusion + sys.rhs_jump;
    const VectorXd w = lu.solve(rhs);
    const VectorXd w0 = lu.solve(sys.rhs_diffusion);
    const VectorXd wj = lu.solve(sys.rhs_jump);
    sol.rcond = lu.rcond();
    sol.system_residual = std::max({lu.relative_residual(w, rhs),
                                    lu.relative_residual(w0, sys.rhs_diffusion),
                                    lu.relative_residual(wj, sys.rhs_jump)});
    const auto [m, n] = dims_of(model);
    const bool lower = sol.euro.has_lower_region;
    sol.total = unpack(sys, w, m, n, lower);
    sol.diffusion = unpack(sys, w0, m, n, lower);
    sol.jump = unpack(sys, wj, m, n, lower);

    const double lhs = eep_branch_slope(sol, sol.total, b);
    sol.smooth_fit_residual = (lhs - gap_slope(sol.euro, b)) / gap_scale(sol.euro, b);
    return sol;
}

EepSplit eval_eep_split_mr(const MrAmericanSolution& sol, double x) {
    if (!(x > 0.0)) return {};
    if (x == sol.boundary) {
        const double g = gap_value(sol.euro, sol.log_boundary);
        return {g, g, 0.0};
    }
    return sol.eep_log(std::log(x));
}

EepSplit eval_continued_eep_split_mr(const MrAmericanSolution& sol, double x) {
    if (!(x > 0.0)) return {};
    return sol.continued_eep_log(std::log(x));
}

double eval_american_mr(const MrAmericanSolution& sol, double x) {
    if (!(x > 0.0)) return 0.0;
    if (x >= sol.boundary) return x - sol.euro.strike;
    return sol.value_log(std::log(x));
}

double seasoned_price(double raw_price, const DownOutStepSpec& spec) {
    return std::exp(spec.knock_rate * spec.seasoning) * raw_price;
}

// ---------------------------------------------------------------------------
// OIDE residuals

namespace {

double oide_residual_impl(const HejdModel& model, const DownOutStepSpec& spec, double theta,
                          const std::function<double(double)>& value,
                          const std::vector<double>& breakpoints, double log_barrier,
                          bool has_lower, std::span<const double> x_grid, double skip_from) {
    constexpr double kMaxStep = 1e-4;
    double worst = 0.0;
    for (double spot : x_grid) {
        if (!(spot > 0.0) || spot >= skip_from) continue;
        const double x = std::log(spot);
        double dist = std::numeric_limits<double>::infinity();
        for (double bp : breakpoints) dist = std::min(dist, std::abs(x - bp));
        GeneratorConfig cfg;
        cfg.step = std::min(kMaxStep, 0.25 * dist);
        cfg.breakpoints = breakpoints;
        // Roundoff in the summed exponentials caps the attainable quadrature
        // accuracy near 1e-10 relative; residuals are reported relative to theta K.
        cfg.rel_tol = 1e-9;
        cfg.abs_tol = 1e-12 * theta * spec.strike;
        const double gen = generator_apply(model, value, x, cfg);
        const double kill = model.r() + theta - (has_lower && x < log_barrier ? spec.knock_rate : 0.0);
        const double source = theta * std::max(spot - spec.strike, 0.0);
        const double res = source + gen - kill * value(x);
        worst = std::max(worst, std::abs(res));
    }
    return worst / (theta * spec.strike);
}

}  // namespace

double oide_residual(const HejdModel& model, const DownOutStepSpec& spec, double theta,
                     const MrEuropeanSolution& sol, std::span<const double> x_grid) {
    std::vector<double> bps{sol.log_strike};
    if (sol.has_lower_region) bps.push_back(sol.log_barrier);
    auto f = [&sol](double x) { return sol.value_log(x); };
    return oide_residual_impl(model, spec, theta, f, bps, sol.log_barrier, sol.has_lower_region,
                              x_grid, std::numeric_limits<double>::infinity());
}

double oide_residual(const HejdModel& model, const DownOutStepSpec& spec, double theta,
                     const MrAmericanSolution& sol, std::span<const double> x_grid) {
    const auto& e = sol.euro;
    std::vector<double> bps{e.log_strike, sol.log_boundary};
    if (e.has_lower_region) bps.push_back(e.log_barrier);
    auto f = [&sol](double x) { return sol.value_log(x); };
    return oide_residual_impl(model, spec, theta, f, bps, e.log_barrier, e.has_lower_region, x_grid,
                              sol.boundary);
}

}  // namespace hejd
