// SPDX-License-Identifier: Apache-2.0
#include "hejd/errors.hpp"
#include "hejd/mr_pricer.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <vector>

namespace hejd {
namespace {

using test::ladder_model;
using test::ladder_spec;

using test::random_case;
using test::spot_grid;
using Case = test::RandomCase;

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b))); }

TEST(EuropeanMr, LinearSystemResidual) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const Case c = random_case(rng);
        const MrEuropeanSolution sol = solve_european_mr(c.model, c.spec, c.theta);
        EXPECT_LE(sol.system_residual, 1e-9);
        EXPECT_GT(sol.rcond, 0.0);
    }
}

TEST(EuropeanMr, ContinuousWithContinuousSlopeAtBarrierAndStrike) {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 50; ++trial) {
        const Case c = random_case(rng);
        const MrEuropeanSolution sol = solve_european_mr(c.model, c.spec, c.theta);
        for (double at : {sol.log_barrier, sol.log_strike}) {
            const double below = std::nextafter(at, -INFINITY);
            const double above = std::nextafter(at, INFINITY);
            EXPECT_LE(rel_gap(sol.value_log(below), sol.value_log(above)), 1e-8) << "x = " << at;
            EXPECT_LE(rel_gap(sol.slope_log(below), sol.slope_log(above)), 1e-7) << "x = " << at;
        }
    }
}

TEST(EuropeanMr, AsymptoticsAtZeroAndInfinity) {
    const MrEuropeanSolution sol = solve_european_mr(ladder_model(1.0), ladder_spec(-26.34), 2.0);
    EXPECT_EQ(eval_european_mr(sol, 0.0), 0.0);
    EXPECT_LT(eval_european_mr(sol, 1e-3), 1e-12);
    // Far above the strike the value approaches the particular solution
    // theta (x/(delta+theta) - K/(r+theta)), so value/x -> theta/(delta+theta).
    for (double x : {1e4, 1e6, 1e8}) {
        const double particular = 2.0 * (x / 2.07 - 100.0 / 2.05);
        EXPECT_NEAR(eval_european_mr(sol, x) / x, particular / x, 1e-12);
    }
    EXPECT_NEAR(eval_european_mr(sol, 1e8) / 1e8, 2.0 / 2.07, 1e-6);
}

// E[e^{-r tau} (S_tau - K)^+] for tau ~ Exp(theta), as the integral of the
// Black-Scholes price against the exponential density.
double randomized_bs_call(double s, double k, double r, double q, double sigma, double theta) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(
        [&](double t) { return theta * std::exp(-theta * t) * test::bs_call(s, k, r, q, sigma, t); },
        1e-13);
}

TEST(EuropeanMr, StandardContractMatchesRandomizedBlackScholes) {
    const HejdModel bs = HejdModel::black_scholes(0.05, 0.07, 0.2);
    for (double barrier : {0.0, 95.0}) {
        DownOutStepSpec spec = ladder_spec(0.0);
        spec.barrier = barrier;
        for (double theta : {0.3, 1.0, 7.0}) {
            const MrEuropeanSolution sol = solve_european_mr(bs, spec, theta);
            for (double x : {80.0, 95.0, 100.0, 120.0}) {
                const double expected = randomized_bs_call(x, 100.0, 0.05, 0.07, 0.2, theta);
                EXPECT_NEAR(eval_european_mr(sol, x), expected, 1e-8 * std::max(1.0, expected))
                    << "L " << barrier << " theta " << theta << " x " << x;
            }
        }
    }
}

TEST(EuropeanMr, ShortRandomizedMaturityRecoversPayoff) {
    const MrEuropeanSolution sol = solve_european_mr(ladder_model(1.0), ladder_spec(0.0), 1e6);
    EXPECT_NEAR(eval_european_mr(sol, 110.0), 10.0, 1e-2);
    EXPECT_NEAR(eval_european_mr(sol, 90.0), 0.0, 1e-2);
}

TEST(EuropeanMr, OideResidualOnRandomModels) {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        const Case c = random_case(rng);
        const MrEuropeanSolution sol = solve_european_mr(c.model, c.spec, c.theta);
        const auto grid = spot_grid(0.5 * c.spec.barrier, 1.5 * c.spec.strike, 50);
        EXPECT_LE(oide_residual(c.model, c.spec, c.theta, sol, grid), 1e-6) << "trial " << trial;
    }
}

TEST(EuropeanMr, ZeroFunctionHasZeroResidualForRemoteStrike) {
    // A strike far above the grid leaves (x - K)^+ = 0 and a value that is
    // numerically zero, so the OIDE residual vanishes.
    DownOutStepSpec spec = ladder_spec(-1.0);
    spec.strike = 1e12;
    spec.barrier = 95.0;
    const MrEuropeanSolution sol = solve_european_mr(ladder_model(1.0), spec, 1.0);
    const auto grid = spot_grid(50.0, 150.0, 10);
    EXPECT_LE(oide_residual(ladder_model(1.0), spec, 1.0, sol, grid), 1e-12);
}

TEST(EuropeanMr, PriceOrderingAndMonotonicityInKnockRate) {
    const HejdModel m = ladder_model(1.0);
    for (double theta : {0.5, 2.0, 20.0}) {
        for (double x : {90.0, 96.0, 100.0, 110.0}) {
            double previous = -1.0;
            for (double rho : {-5e7, -1e7, -100.0, -26.34, -1.0, 0.0}) {
                const double v = eval_european_mr(solve_european_mr(m, ladder_spec(rho), theta), x);
                EXPECT_GE(v, previous - 1e-12) << "rho " << rho << " x " << x;
                previous = v;
            }
        }
    }
}

TEST(EuropeanMr, DegenerateBarriers) {
    const HejdModel m = ladder_model(1.0);
    DownOutStepSpec none = ladder_spec(-26.34);
    none.barrier = 0.0;
    const MrEuropeanSolution a = solve_european_mr(m, none, 1.0);
    EXPECT_FALSE(a.has_lower_region);
    EXPECT_LE(a.system_residual, 1e-9);
    // Without a barrier the knock-out rate is irrelevant.
    EXPECT_NEAR(eval_european_mr(a, 100.0),
                eval_european_mr(solve_european_mr(m, ladder_spec(0.0), 1.0), 100.0), 1e-10);

    DownOutStepSpec at_strike = ladder_spec(-26.34);
    at_strike.barrier = 100.0;
    const MrEuropeanSolution b = solve_european_mr(m, at_strike, 1.0);
    EXPECT_LE(b.system_residual, 1e-9);
    EXPECT_GT(eval_european_mr(b, 105.0), 0.0);
    EXPECT_LT(eval_european_mr(b, 105.0), eval_european_mr(solve_european_mr(m, ladder_spec(-26.34), 1.0), 105.0));
}

TEST(EuropeanMr, RejectsInvalidIntensity) {
    EXPECT_THROW(solve_european_mr(ladder_model(1.0), ladder_spec(0.0), 0.0), ModelError);
    EXPECT_THROW(solve_european_mr(ladder_model(1.0), ladder_spec(0.0), -1.0), ModelError);
}

class AmericanMr : public ::testing::Test {
protected:
    static void check_solution(const HejdModel& m, const DownOutStepSpec& spec, double theta) {
        const MrAmericanSolution sol = solve_american_mr(m, spec, theta);
        SCOPED_TRACE("theta " + std::to_string(theta));
        EXPECT_LE(sol.system_residual, 1e-9);
        EXPECT_LE(std::abs(sol.smooth_fit_residual), 1e-8);
        EXPECT_GE(sol.boundary, spec.strike);

        const auto flat_w = sol.total.flat();
        const auto flat_0 = sol.diffusion.flat();
        const auto flat_j = sol.jump.flat();
        ASSERT_EQ(flat_w.size(), flat_0.size());
        for (std::size_t i = 0; i < flat_w.size(); ++i) {
            EXPECT_NEAR(flat_0[i] + flat_j[i], flat_w[i], 1e-9 * std::max(1.0, std::abs(flat_w[i])));
        }

        const double b = sol.boundary;
        const EepSplit at_b = eval_eep_split_mr(sol, b);
        const double gap = b - spec.strike - eval_european_mr(sol.euro, b);
        EXPECT_NEAR(at_b.total, gap, 1e-8 * std::max(1.0, gap));
        EXPECT_NEAR(at_b.diffusion, gap, 1e-8 * std::max(1.0, gap));
        EXPECT_NEAR(at_b.jump, 0.0, 1e-8);

        for (double x : spot_grid(0.5 * spec.strike, 1.2 * b, 25)) {
            const EepSplit e = eval_eep_split_mr(sol, x);
            EXPECT_GE(e.total, -1e-10) << "x " << x;
            EXPECT_NEAR(e.diffusion + e.jump, e.total, 1e-9 * std::max(1.0, std::abs(e.total)));
            EXPECT_GE(eval_american_mr(sol, x), eval_european_mr(sol.euro, x) - 1e-10);
            EXPECT_GE(eval_american_mr(sol, x), std::max(x - spec.strike, 0.0) - 1e-9);
        }
    }
};

TEST_F(AmericanMr, LadderContracts) {
    for (double rho : {0.0, -26.34, -5e7}) {
        for (double theta : {0.1, 1.0, 10.0, 200.0}) check_solution(ladder_model(1.0), ladder_spec(rho), theta);
    }
}

TEST_F(AmericanMr, RandomizedModels) {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 20; ++trial) {
        const Case c = random_case(rng);
        SCOPED_TRACE("trial " + std::to_string(trial));
        check_solution(c.model, c.spec, c.theta);
    }
}

TEST_F(AmericanMr, OideResidualOnContinuationRegion) {
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 10; ++trial) {
        const Case c = random_case(rng);
        const MrAmericanSolution sol = solve_american_mr(c.model, c.spec, c.theta);
        const auto grid = spot_grid(c.spec.barrier, sol.boundary, 50);
        EXPECT_LE(oide_residual(c.model, c.spec, c.theta, sol, grid), 1e-6) << "trial " << trial;
    }
}

TEST_F(AmericanMr, JumpPremiumVanishesWithoutJumps) {
    const MrAmericanSolution sol = solve_american_mr(ladder_model(1e-12), ladder_spec(-26.34), 1.0);
    double max_total = 0.0, max_jump = 0.0;
    for (double x : spot_grid(95.0, sol.boundary, 40)) {
        const EepSplit e = eval_eep_split_mr(sol, x);
        max_total = std::max(max_total, std::abs(e.total));
        max_jump = std::max(max_jump, std::abs(e.jump));
    }
    EXPECT_LT(max_jump, 1e-6 * max_total);
}

TEST_F(AmericanMr, BoundaryFallsTowardStrikeAsIntensityGrows) {
    double previous = INFINITY;
    for (double theta : {0.5, 5.0, 50.0, 500.0, 5000.0}) {
        const double b = solve_american_mr(ladder_model(1.0), ladder_spec(-26.34), theta).boundary;
        EXPECT_LT(b, previous);
        EXPECT_GT(b, 100.0);
        previous = b;
    }
    EXPECT_LT(previous, 105.0);
}

TEST_F(AmericanMr, ExerciseRegionValue) {
    const MrAmericanSolution sol = solve_american_mr(ladder_model(1.0), ladder_spec(-26.34), 1.0);
    for (double x : {sol.boundary * 1.01, sol.boundary * 1.5}) {
        EXPECT_NEAR(eval_american_mr(sol, x), x - 100.0, 1e-9 * x);
        const EepSplit e = eval_eep_split_mr(sol, x);
        EXPECT_NEAR(e.total, x - 100.0 - eval_european_mr(sol.euro, x), 1e-9 * x);
        EXPECT_EQ(e.jump, e.total);
        EXPECT_EQ(e.diffusion, 0.0);
    }
}

TEST_F(AmericanMr, ReusesEuropeanSolution) {
    const HejdModel m = ladder_model(1.0);
    const auto euro = solve_european_mr(m, ladder_spec(-26.34), 3.0);
    const auto a = solve_american_mr(m, ladder_spec(-26.34), euro);
    const auto b = solve_american_mr(m, ladder_spec(-26.34), 3.0);
    EXPECT_EQ(a.boundary, b.boundary);
    EXPECT_EQ(eval_american_mr(a, 101.0), eval_american_mr(b, 101.0));
}

TEST_F(AmericanMr, NoEarlyExerciseWithoutDividends) {
    const HejdModel m = HejdModel::kou(0.05, 0.0, 0.2, 1.0, 0.7, 25.0, 50.0);
    EXPECT_THROW(solve_american_mr(m, ladder_spec(-26.34), 1.0), NoBoundaryError);
}

TEST_F(AmericanMr, BarrierAtZeroAndAtStrike) {
    DownOutStepSpec none = ladder_spec(-26.34);
    none.barrier = 0.0;
    check_solution(ladder_model(1.0), none, 1.0);
    DownOutStepSpec at_strike = ladder_spec(-26.34);
    at_strike.barrier = 100.0;
    check_solution(ladder_model(1.0), at_strike, 1.0);
}

}  // namespace
}  // namespace hejd
