// SPDX-License-Identifier: Apache-2.0
#include "hejd/simd/kernel.hpp"

#include <immintrin.h>

namespace hejd::simd {

void step_avx2(const StepParams& p, double* x, double* occ, const double* z,
               std::size_t n) noexcept {
    const __m256d drift = _mm256_set1_pd(p.drift_dt);
    const __m256d vol = _mm256_set1_pd(p.vol_sqrt_dt);
    const __m256d barrier = _mm256_set1_pd(p.barrier);
    const __m256d dt = _mm256_set1_pd(p.dt);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d inside = p.count_above ? _mm256_cmp_pd(xv, barrier, _CMP_GT_OQ)
                                             : _mm256_cmp_pd(xv, barrier, _CMP_LT_OQ);
        const __m256d o = _mm256_add_pd(_mm256_loadu_pd(occ + i), _mm256_and_pd(inside, dt));
        _mm256_storeu_pd(occ + i, o);
        const __m256d step = _mm256_mul_pd(vol, _mm256_loadu_pd(z + i));
        _mm256_storeu_pd(x + i, _mm256_add_pd(_mm256_add_pd(xv, drift), step));
    }
    if (i < n) step_scalar(p, x + i, occ + i, z + i, n - i);
}

}  // namespace hejd::simd
