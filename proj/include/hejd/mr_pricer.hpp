// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hejd/model.hpp"
#include "hejd/roots.hpp"

#include <span>
#include <vector>

namespace hejd {

/// Closed-form maturity-randomized European down-and-out step call.
///
/// In log-price x with l = log L and k = log K the value is
///   sum_s A+_s e^{beta'_s (x - l)}                               x < l
///   sum_s B+_s e^{beta_s (x - k)} + sum_u B-_u e^{gamma_u (x - l)}  l <= x <= k
///   sum_u C-_u e^{gamma_u (x - k)} + theta (e^x/(delta+theta) - K/(r+theta))   x > k
/// where beta' are roots at level r + theta - rho_L and beta, gamma roots at
/// level r + theta. Each middle-region exponential is anchored at the end of
/// [l, k] where it is largest, so every system entry is at most 1 in size.
/// Without a barrier (L = 0) the lower region is empty and B- is identically
/// zero.
struct MrEuropeanSolution {
    double theta = 0.0;
    double r = 0.0;
    double delta = 0.0;
    double strike = 0.0;
    double barrier = 0.0;  ///< effective barrier (after the L = K perturbation)
    double log_strike = 0.0;
    double log_barrier = 0.0;
    bool has_lower_region = true;
    double b_plus_anchor = 0.0;   ///< log-price where the B+ exponentials equal 1
    double b_minus_anchor = 0.0;  ///< log-price where the B- exponentials equal 1

    RootSet knocked_roots;  ///< level r + theta - rho_L
    RootSet roots;          ///< level r + theta

    std::vector<double> a_plus;
    std::vector<double> b_plus;
    std::vector<double> b_minus;
    std::vector<double> c_minus;

    /// max |Q_E v - q_E| / max |q_E|.
    double system_residual = 0.0;
    /// Reciprocal condition estimate of the equilibrated system.
    double rcond = 0.0;

    /// Value in log-price.
    double value_log(double log_x) const noexcept;
    /// d value / d log-price.
    double slope_log(double log_x) const noexcept;

    /// Particular solution above the strike, theta (e^x/(delta+theta) - K/(r+theta)).
    double particular(double log_x) const noexcept;
};

/// Early exercise premium coefficients (D+, F+, F-) for one of the total,
/// diffusion or jump parts.
struct EepCoefficients {
    std::vector<double> d_plus;
    std::vector<double> f_plus;
    std::vector<double> f_minus;

    /// Flattened (D+, F+, F-).
    std::vector<double> flat() const;
};

/// Total, diffusion and jump contributions to the early exercise premium.
struct EepSplit {
    double total = 0.0;
    double diffusion = 0.0;
    double jump = 0.0;
};

/// Maturity-randomized American down-and-out step call as European value plus
/// early exercise premium with free boundary b*.
struct MrAmericanSolution {
    MrEuropeanSolution euro;
    double boundary = 0.0;
    double log_boundary = 0.0;
    double f_plus_anchor = 0.0;   ///< log-price where the F+ exponentials equal 1
    double f_minus_anchor = 0.0;  ///< log-price where the F- exponentials equal 1

    EepCoefficients total;      ///< w
    EepCoefficients diffusion;  ///< w_0
    EepCoefficients jump;       ///< w_J

    /// Relative smooth-fit residual at b*.
    double smooth_fit_residual = 0.0;
    /// max |Q_A w - q_A| / max |q_A| over w, w_0 and w_J.
    double system_residual = 0.0;
    double rcond = 0.0;

    /// Exercise payoff minus European value, valid on [b*, inf).
    double exercise_gap_log(double log_x) const noexcept;

    EepSplit eep_log(double log_x) const noexcept;
    /// Continuation-region expressions at any log-price, also past b*.
    EepSplit continued_eep_log(double log_x) const noexcept;
    double eep_slope_log(double log_x) const noexcept;
    double value_log(double log_x) const noexcept;
};

/// Knobs for the free-boundary search.
struct BoundarySearchConfig {
    double lower_rel = 1e-6;        ///< search starts at max(K, L) (1 + lower_rel)
    double initial_log_span = 5.0;  ///< initial upper end K e^{span}
    double max_log_span = 20.0;
    int scan_points = 48;           ///< grid used to detect sign changes
};

MrEuropeanSolution solve_european_mr(const HejdModel& model, const DownOutStepSpec& spec,
                                     double theta);

/// Value at spot x >= 0.
double eval_european_mr(const MrEuropeanSolution& sol, double x);

/// Throws NoBoundaryError if the smooth-fit residual has no sign change, or
/// more than one, in the search bracket.
MrAmericanSolution solve_american_mr(const HejdModel& model, const DownOutStepSpec& spec,
                                     double theta, const BoundarySearchConfig& search = {});

/// Same, reusing an already solved European problem.
MrAmericanSolution solve_american_mr(const HejdModel& model, const DownOutStepSpec& spec,
                                     MrEuropeanSolution euro,
                                     const BoundarySearchConfig& search = {});

EepSplit eval_eep_split_mr(const MrAmericanSolution& sol, double x);

/// Premium split from the continuation-region expressions, analytically
/// continued into the exercise region. Smooth in theta for a fixed spot, which
/// is what the time-domain inversion needs.
EepSplit eval_continued_eep_split_mr(const MrAmericanSolution& sol, double x);

/// American value at spot x >= 0.
double eval_american_mr(const MrAmericanSolution& sol, double x);

/// Smooth-fit residual R(b) of the early exercise premium at a candidate
/// boundary b (LHS - RHS, normalized by the RHS scale).
double smooth_fit_residual(const HejdModel& model, const MrEuropeanSolution& euro, double boundary);

/// e^{rho_L gamma_L} times a price computed for a contract initiated today.
double seasoned_price(double raw_price, const DownOutStepSpec& spec);

/// Max normalized residual of the European OIDE
///   theta (x - K)^+ + A_S f - (r + theta - rho_L 1{x < L}) f
/// over the spot grid, divided by theta K.
double oide_residual(const HejdModel& model, const DownOutStepSpec& spec, double theta,
                     const MrEuropeanSolution& sol, std::span<const double> x_grid);

/// Same for the American value on its continuation region; grid points at or
/// above b* are skipped.
double oide_residual(const HejdModel& model, const DownOutStepSpec& spec, double theta,
                     const MrAmericanSolution& sol, std::span<const double> x_grid);

}  // namespace hejd
