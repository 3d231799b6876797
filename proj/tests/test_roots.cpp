// SPDX-License-Identifier: Apache-2.0
#include "hejd/errors.hpp"
#include "hejd/roots.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace hejd {
namespace {

double residual(const HejdModel& m, double theta, double alpha) {
    return std::abs(static_cast<double>(test::laplace_exponent_ld(m, theta) - alpha));
}

// The residual target holds wherever one ulp of theta moves Phi by less than
// the target. Closer to a pole no double meets it, and the root must instead
// be the best double: no neighbour has a smaller residual.
void expect_accurate(const HejdModel& m, double root, double alpha, double tol) {
    const double ulp = std::nextafter(root, INFINITY) - root;
    const double sensitivity = ulp * std::abs(laplace_exponent_derivative(m, root));
    const double res = residual(m, root, alpha);
    if (sensitivity <= tol) {
        EXPECT_LE(res, tol) << "root " << root;
    } else {
        EXPECT_LE(res, residual(m, std::nextafter(root, INFINITY), alpha)) << "root " << root;
        EXPECT_LE(res, residual(m, std::nextafter(root, -INFINITY), alpha)) << "root " << root;
    }
}

// Checks root count, interlacing with the poles and the residual bound.
void expect_valid(const HejdModel& m, const RootSet& roots, double alpha) {
    const auto up = m.active_up();
    const auto down = m.active_down();
    ASSERT_EQ(roots.betas.size(), up.size() + 1);
    ASSERT_EQ(roots.gammas.size(), down.size() + 1);
    EXPECT_GT(roots.betas[0], 0.0);
    for (std::size_t s = 0; s < up.size(); ++s) {
        EXPECT_LT(roots.betas[s], up[s].rate);
        EXPECT_GT(roots.betas[s + 1], up[s].rate);
    }
    EXPECT_LT(roots.gammas[0], 0.0);
    for (std::size_t u = 0; u < down.size(); ++u) {
        EXPECT_GT(roots.gammas[u], -down[u].rate);
        EXPECT_LT(roots.gammas[u + 1], -down[u].rate);
    }
    const double tol = 1e-10 * std::max(1.0, alpha);
    for (double root : roots.betas) expect_accurate(m, root, alpha, tol);
    for (double root : roots.gammas) expect_accurate(m, root, alpha, tol);
    for (std::size_t i = 0; i < roots.betas.size(); ++i) {
        EXPECT_LE(roots.beta_brackets[i].lower, roots.betas[i]);
        EXPECT_GE(roots.beta_brackets[i].upper, roots.betas[i]);
    }
    for (std::size_t i = 0; i < roots.gammas.size(); ++i) {
        EXPECT_LE(roots.gamma_brackets[i].lower, roots.gammas[i]);
        EXPECT_GE(roots.gamma_brackets[i].upper, roots.gammas[i]);
    }
}

TEST(FindRoots, KouModelHasFourInterlacedRoots) {
    const HejdModel kou = test::ladder_model(1.0);
    for (double theta : {0.01, 1.0, 13.9, 500.0}) {
        const double alpha = 0.05 + theta;
        const RootSet roots = find_roots(kou, alpha);
        expect_valid(kou, roots, alpha);
        EXPECT_EQ(roots.alpha, alpha);
    }
}

TEST(FindRoots, RandomizedModelsSatisfyInterlacingAndResidual) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const HejdModel m = test::random_model(rng);
        for (double alpha : {0.05, 1.0, 10.0, 100.0}) {
            SCOPED_TRACE("trial " + std::to_string(trial) + " alpha " + std::to_string(alpha));
            expect_valid(m, find_roots(m, alpha), alpha);
        }
    }
}

TEST(FindRoots, DiffusionLimitApproachesQuadraticRoots) {
    const HejdModel m = test::ladder_model(1e-12);
    const double alpha = 0.1;
    // sigma^2/2 t^2 + (r - delta - sigma^2/2) t - alpha = 0
    const double a = 0.02, b = 0.05 - 0.07 - 0.02, c = -alpha;
    const double disc = std::sqrt(b * b - 4.0 * a * c);
    const double plus = (-b + disc) / (2.0 * a);
    const double minus = (-b - disc) / (2.0 * a);
    // Without any jump mass the pole-adjacent roots are absent.
    const RootSet bs = find_roots(HejdModel::black_scholes(0.05, 0.07, 0.2), alpha);
    ASSERT_EQ(bs.betas.size(), 1u);
    ASSERT_EQ(bs.gammas.size(), 1u);
    EXPECT_NEAR(bs.betas[0], plus, 1e-10);
    EXPECT_NEAR(bs.gammas[0], minus, 1e-10);

    const RootSet roots = find_roots(m, alpha);
    ASSERT_EQ(roots.betas.size(), 2u);
    ASSERT_EQ(roots.gammas.size(), 2u);
    EXPECT_NEAR(roots.betas[0], plus, 1e-8);
    EXPECT_NEAR(roots.gammas[0], minus, 1e-8);
    EXPECT_NEAR(roots.betas[1], 25.0, 1e-8);
    EXPECT_NEAR(roots.gammas[1], -50.0, 1e-8);
}

TEST(FindRoots, RootWithinUlpsOfAPoleIsBracketed) {
    // The diffusion part alone stays below alpha on (0, 25), so the only root
    // there is pushed up against the pole by a jump term of size 1e-12.
    const HejdModel kou = HejdModel::kou(0.05, 0.07, 0.2, 1e-12, 0.5, 25.0, 50.0);
    const double alpha = 1000.75;
    const RootSet roots = find_roots(kou, alpha);
    expect_valid(kou, roots, alpha);
    EXPECT_LT(25.0 - roots.betas[1], 1e-13);
}

TEST(FindRoots, SmallAlphaSendsOneRootToZero) {
    const HejdModel kou = test::ladder_model(1.0);
    const RootSet roots = find_roots(kou, 1e-10);
    // Phi'(0) < 0 here, so the positive root goes to zero.
    ASSERT_LT(laplace_exponent_derivative(kou, 0.0), 0.0);
    EXPECT_LT(std::min(roots.betas[0], -roots.gammas[0]), 1e-6);
    EXPECT_GT(roots.betas[0], 0.0);
    EXPECT_LT(roots.gammas[0], 0.0);
}

TEST(FindRoots, RootsMoveOutwardWithAlpha) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        const HejdModel m = test::random_model(rng);
        const RootSet lo = find_roots(m, 0.5);
        const RootSet hi = find_roots(m, 5.0);
        for (std::size_t s = 0; s < lo.betas.size(); ++s) EXPECT_LT(lo.betas[s], hi.betas[s]);
        for (std::size_t u = 0; u < lo.gammas.size(); ++u) EXPECT_GT(lo.gammas[u], hi.gammas[u]);
    }
}

TEST(FindRoots, DualRootsAreReflectedAboutOneHalf) {
    // Phi_Y(theta) = Phi_X(1 - theta) - (r - delta), so every root t of
    // Phi_X = alpha gives the root 1 - t of Phi_Y = alpha - (r - delta).
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const HejdModel m = test::random_model(rng);
        const HejdModel y = dual_model(m).model;
        const double alpha = 2.0;
        const RootSet rx = find_roots(m, alpha);
        const RootSet ry = find_roots(y, alpha - (m.r() - m.delta()));
        std::vector<double> lhs, rhs;
        for (double b : rx.betas) lhs.push_back(1.0 - b);
        for (double g : rx.gammas) lhs.push_back(1.0 - g);
        rhs.insert(rhs.end(), ry.betas.begin(), ry.betas.end());
        rhs.insert(rhs.end(), ry.gammas.begin(), ry.gammas.end());
        std::sort(lhs.begin(), lhs.end());
        std::sort(rhs.begin(), rhs.end());
        ASSERT_EQ(lhs.size(), rhs.size());
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            EXPECT_NEAR(lhs[i], rhs[i], 1e-8 * std::max(1.0, std::abs(lhs[i])));
        }
    }
}

TEST(FindRoots, RejectsNonPositiveAlpha) {
    const HejdModel kou = test::ladder_model(1.0);
    EXPECT_THROW(find_roots(kou, 0.0), BracketError);
    EXPECT_THROW(find_roots(kou, -1.0), BracketError);
    EXPECT_THROW(find_roots(kou, std::nan("")), BracketError);
}

TEST(FindRoots, MaxRootMagnitude) {
    const HejdModel kou = test::ladder_model(1.0);
    const RootSet roots = find_roots(kou, 10.0);
    const double expected = std::max(roots.betas.back(), -roots.gammas.back());
    EXPECT_EQ(max_root_magnitude(roots), expected);
}

}  // namespace
}  // namespace hejd
