// SPDX-License-Identifier: Apache-2.0
#include "hejd/simd/kernel.hpp"

namespace hejd::simd {

void step_scalar(const StepParams& p, double* x, double* occ, const double* z,
                 std::size_t n) noexcept {
    for (std::size_t i = 0; i < n; ++i) {
        const bool inside = p.count_above ? x[i] > p.barrier : x[i] < p.barrier;
        occ[i] = occ[i] + (inside ? p.dt : 0.0);
        x[i] = (x[i] + p.drift_dt) + p.vol_sqrt_dt * z[i];
    }
}

}  // namespace hejd::simd
