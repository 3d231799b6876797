// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace hejd {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A block is a
/// pure function of (counter, key), so any path's draws can be produced
/// independently of how paths are scheduled.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Block generate(Block ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Two doubles in (0, 1] with 53 random bits each from one block.
inline std::pair<double, double> block_to_unit(const Philox4x32::Block& b) noexcept {
    constexpr double kScale = 0x1.0p-53;
    const std::uint64_t a = (std::uint64_t{b[0]} << 32 | b[1]) >> 11;
    const std::uint64_t c = (std::uint64_t{b[2]} << 32 | b[3]) >> 11;
    return {(static_cast<double>(a) + 1.0) * kScale, (static_cast<double>(c) + 1.0) * kScale};
}

/// Box-Muller pair of standard normals from a (0, 1] radius uniform and a
/// (0, 1) angle uniform. The angle is centred on zero, which keeps sin/cos
/// on their fast argument range.
inline std::pair<double, double> box_muller(double u1, double u2) noexcept {
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * (u2 - 0.5);
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// Four normals from one block using 32-bit uniforms; the radius uniform is
/// at least 2^-32, so |z| <= 6.67.
inline std::array<double, 4> block_to_normals(const Philox4x32::Block& b) noexcept {
    constexpr double kScale = 0x1.0p-32;
    const auto [z0, z1] = box_muller((b[0] + 1.0) * kScale, (b[1] + 0.5) * kScale);
    const auto [z2, z3] = box_muller((b[2] + 1.0) * kScale, (b[3] + 0.5) * kScale);
    return {z0, z1, z2, z3};
}

}  // namespace hejd
