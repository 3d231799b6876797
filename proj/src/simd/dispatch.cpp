// SPDX-License-Identifier: Apache-2.0
#include "hejd/simd/kernel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace hejd::simd {

std::vector<Variant> available_variants() {
    std::vector<Variant> out{Variant::scalar};
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2")) out.push_back(Variant::avx2);
#endif
#if defined(__aarch64__)
    out.push_back(Variant::neon);
#endif
    return out;
}

Variant active_variant() {
    static const Variant chosen = [] {
        const std::vector<Variant> avail = available_variants();
        if (const char* env = std::getenv("HEJD_SIMD")) {
            const std::string want(env);
            for (Variant v : avail) {
                if (to_string(v) == want) return v;
            }
        }
        return avail.back();
    }();
    return chosen;
}

StepFn step_function(Variant v) {
    switch (v) {
#if defined(__x86_64__) || defined(_M_X64)
        case Variant::avx2: return &step_avx2;
#endif
#if defined(__aarch64__)
        case Variant::neon: return &step_neon;
#endif
        default: return &step_scalar;
    }
}

std::string_view to_string(Variant v) noexcept {
    switch (v) {
        case Variant::scalar: return "scalar";
        case Variant::avx2: return "avx2";
        case Variant::neon: return "neon";
    }
    return "scalar";
}

}  // namespace hejd::simd
