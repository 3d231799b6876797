// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace hejd::simd {

/// One diffusion step for a batch of log-price paths with occupation-time
/// accumulation on the left endpoint:
///   occ[i] += dt if x[i] is on the counted side of the barrier
///   x[i]    = (x[i] + drift_dt) + vol_sqrt_dt * z[i]
/// Every variant performs the same IEEE operations in the same order, so the
/// results are bit-identical across variants.
struct StepParams {
    double drift_dt = 0.0;
    double vol_sqrt_dt = 0.0;
    double barrier = 0.0;  ///< log-barrier
    double dt = 0.0;
    bool count_above = false;  ///< count x > barrier instead of x < barrier
};

enum class Variant { scalar, avx2, neon };

using StepFn = void (*)(const StepParams&, double* x, double* occ, const double* z,
                        std::size_t n) noexcept;

void step_scalar(const StepParams& p, double* x, double* occ, const double* z,
                 std::size_t n) noexcept;
#if defined(__x86_64__) || defined(_M_X64)
void step_avx2(const StepParams& p, double* x, double* occ, const double* z,
               std::size_t n) noexcept;
#endif
#if defined(__aarch64__)
void step_neon(const StepParams& p, double* x, double* occ, const double* z,
               std::size_t n) noexcept;
#endif

/// Variants compiled in and supported by the running CPU.
std::vector<Variant> available_variants();

/// Variant picked at first use: the HEJD_SIMD environment variable
/// (scalar|avx2|neon) if set and available, otherwise the widest available.
Variant active_variant();

StepFn step_function(Variant v);

std::string_view to_string(Variant v) noexcept;

}  // namespace hejd::simd
