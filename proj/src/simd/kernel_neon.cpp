// SPDX-License-Identifier: Apache-2.0
#include "hejd/simd/kernel.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace hejd::simd {

void step_neon(const StepParams& p, double* x, double* occ, const double* z,
               std::size_t n) noexcept {
    const float64x2_t drift = vdupq_n_f64(p.drift_dt);
    const float64x2_t vol = vdupq_n_f64(p.vol_sqrt_dt);
    const float64x2_t barrier = vdupq_n_f64(p.barrier);
    const uint64x2_t dt_bits = vreinterpretq_u64_f64(vdupq_n_f64(p.dt));
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t xv = vld1q_f64(x + i);
        const uint64x2_t inside = p.count_above ? vcgtq_f64(xv, barrier) : vcltq_f64(xv, barrier);
        const float64x2_t add = vreinterpretq_f64_u64(vandq_u64(inside, dt_bits));
        vst1q_f64(occ + i, vaddq_f64(vld1q_f64(occ + i), add));
        // vmulq + vaddq, never vfmaq: rounding must match the scalar path.
        const float64x2_t step = vmulq_f64(vol, vld1q_f64(z + i));
        vst1q_f64(x + i, vaddq_f64(vaddq_f64(xv, drift), step));
    }
    if (i < n) step_scalar(p, x + i, occ + i, z + i, n - i);
}

}  // namespace hejd::simd
#endif
