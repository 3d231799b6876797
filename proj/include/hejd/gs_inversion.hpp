// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hejd/model.hpp"
#include "hejd/mr_pricer.hpp"

#include <functional>
#include <string_view>
#include <vector>

namespace hejd {

/// Gaver-Stehfest order and its weights zeta_{k,N}, k = 1..2N, each held as
/// the unevaluated sum zeta[k-1] + zeta_lo[k-1]. zeta is the nearest double;
/// the pair carries about 32 significant digits, which the N = 10 weights
/// (up to 1.2e11 with alternating signs) need for sums accurate to 1e-9.
struct GsConfig {
    int order = 7;
    std::vector<double> zeta;
    std::vector<double> zeta_lo;
    /// Evaluate the 2N transform values on separate threads. Summation order
    /// is fixed (by k) either way.
    bool parallel = false;
};

inline constexpr int kDefaultGsOrder = 7;
inline constexpr int kMaxGsOrder = 10;

/// Weights for order N in [1, 10]; throws OrderError otherwise. Computed once
/// per order from exact integer sums.
GsConfig gs_weights(int order);

/// Sum of the weights accumulated in 113-bit arithmetic; 1 up to roundoff of
/// the double-double representation.
double gs_weight_sum(const GsConfig& cfg);

/// Abscissae k log 2 / t, k = 1..2N.
std::vector<double> gs_abscissae(double t, int order);

/// sum_k zeta_k F(k log 2 / t), accumulated in 113-bit arithmetic and rounded
/// once. Errors thrown by F are rethrown with the
/// offending abscissa appended.
double gs_invert(const std::function<double(double)>& transform, double t, const GsConfig& cfg);

enum class Quantity { euro, amer, eep, eep_diffusion, eep_jump };

Quantity parse_quantity(std::string_view name);
std::string_view to_string(Quantity q) noexcept;

/// Calendar-time value of the selected quantity at spot x and maturity t,
/// including the seasoning factor. American-family quantities invert the
/// randomized premium as if it were a Laplace-Carson transform, using the
/// continuation-region expressions continued past each b*(theta_k); where the
/// inverted American value falls below the payoff, or the spot is above every
/// b*(theta_k), the exercise-region values (premium all jump) are returned.
double price_time_domain(const HejdModel& model, const DownOutStepSpec& spec, double t, double x,
                         Quantity quantity, const GsConfig& cfg);

/// All quantities at once from a single set of randomized solves.
struct TimeDomainQuote {
    double euro = 0.0;
    double amer = 0.0;
    double eep = 0.0;
    double eep_diffusion = 0.0;
    double eep_jump = 0.0;

    /// 100 eep / amer.
    double eep_percent() const noexcept;
    /// 100 eep_diffusion / eep.
    double diffusion_percent() const noexcept;
};

/// With include_american false only euro is filled.
TimeDomainQuote quote_time_domain(const HejdModel& model, const DownOutStepSpec& spec, double t,
                                  double x, const GsConfig& cfg, bool include_american = true);

}  // namespace hejd
