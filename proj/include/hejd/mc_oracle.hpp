// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hejd/model.hpp"
#include "hejd/simd/kernel.hpp"

#include <cstdint>
#include <vector>

namespace hejd {

/// Monte-Carlo discretization and reproducibility settings.
struct PathConfig {
    std::uint64_t n_paths = 1'000'000;
    /// Occupation-time grid step in years; the grid is refined to T / ceil(T / dt).
    double dt = 1e-3;
    std::uint64_t seed = 20240917;
    /// Pair each path with its Brownian mirror image (same jumps, negated
    /// normals); each pair is one sample.
    bool antithetic = true;
    /// Upper bound on n_paths * steps.
    double max_path_steps = 4e9;
    /// Worker threads; 0 picks the hardware concurrency. Results do not
    /// depend on this value.
    unsigned threads = 0;
    /// Kernel variant; defaults to the dispatcher's choice.
    simd::Variant variant = simd::active_variant();
};

inline constexpr std::uint64_t kMinPaths = 10'000;
inline constexpr double kMaxDt = 1e-3;

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n_paths = 0;
    double dt = 0.0;
};

/// Terminal spot and occupation time of every simulated path.
struct TerminalPaths {
    std::vector<double> spot;
    std::vector<double> occupation;  ///< time spent below the barrier
    double dt = 0.0;
};

/// Simulates S on [0, T] from spot s0 and records S_T and the time spent
/// strictly below `barrier` (left-endpoint rule on the merged grid of jump
/// times and multiples of dt). Throws BudgetError past max_path_steps.
TerminalPaths simulate_terminal(const HejdModel& model, double t, double s0, double barrier,
                                const PathConfig& cfg);

/// e^{-rT} E[e^{rho_L Gamma^-_{T,L}} (S_T - K)^+] with S_0 = x.
McEstimate mc_euro_step_price(const HejdModel& model, const DownOutStepSpec& spec, double t,
                              double x, const PathConfig& cfg);

/// Step put knocked out above an upper barrier:
/// e^{-rT} E[e^{rate Gamma^+_{T,H}} (K - S_T)^+] with S_0 = x.
McEstimate mc_euro_up_step_put(const HejdModel& model, double strike, double upper_barrier,
                               double knock_rate, double t, double x, const PathConfig& cfg);

/// Call under X against the dual put under Y: spot K, strike x, upper barrier
/// x K / L with the same knock-out rate, rates r and delta exchanged. The two
/// sides use independent random streams.
struct DualityReport {
    McEstimate call;
    McEstimate put;
    double difference = 0.0;  ///< call - put
    double pooled_se = 0.0;
    double z_score = 0.0;     ///< difference / pooled_se
};

DualityReport verify_duality(const HejdModel& model, const DownOutStepSpec& spec, double t,
                             double x, const PathConfig& cfg);

}  // namespace hejd
