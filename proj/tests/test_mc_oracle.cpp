// SPDX-License-Identifier: Apache-2.0
#include "hejd/errors.hpp"
#include "hejd/gs_inversion.hpp"
#include "hejd/mc_oracle.hpp"
#include "hejd/philox.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hejd {
namespace {

// Random123 known-answer vectors for Philox4x32-10.
TEST(Philox, KnownAnswerVectors) {
    EXPECT_EQ(Philox4x32::generate({0, 0, 0, 0}, {0, 0}),
              (Philox4x32::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                   {0xffffffffu, 0xffffffffu}),
              (Philox4x32::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                   {0xa4093822u, 0x299f31d0u}),
              (Philox4x32::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, UniformsAndNormalsStayInRange) {
    const auto [u_min, u_max] = block_to_unit({0, 0, 0, 0});
    EXPECT_GT(u_min, 0.0);
    EXPECT_GT(u_max, 0.0);
    const auto [v_min, v_max] = block_to_unit({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu});
    EXPECT_EQ(v_min, 1.0);
    EXPECT_EQ(v_max, 1.0);
    for (const auto& z : block_to_normals({0, 0x80000000u, 0, 0})) {
        EXPECT_LE(std::abs(z), 6.67);
    }
}

PathConfig small_config(std::uint64_t paths = 20'000) {
    PathConfig cfg;
    cfg.n_paths = paths;
    cfg.seed = 7;
    return cfg;
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Standard error of the mean of antithetic pairs stored as consecutive lanes.
double pair_std_error(const std::vector<double>& v) {
    const std::size_t pairs = v.size() / 2;
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
        const double y = 0.5 * (v[2 * i] + v[2 * i + 1]);
        s += y;
        s2 += y * y;
    }
    const double m = s / pairs;
    return std::sqrt((s2 / pairs - m * m) / (pairs - 1.0));
}

TEST(SimulateTerminal, DiffusionIsAMartingaleAfterCarry) {
    const HejdModel bs = HejdModel::black_scholes(0.05, 0.07, 0.2);
    const TerminalPaths p = simulate_terminal(bs, 0.5, 100.0, 95.0, small_config());
    const double expected = 100.0 * std::exp((0.05 - 0.07) * 0.5);
    EXPECT_NEAR(mean(p.spot), expected, 3.0 * pair_std_error(p.spot));
}

TEST(SimulateTerminal, JumpModelIsAMartingaleAfterCarry) {
    const HejdModel m = HejdModel(0.03, 0.01, 0.25, 3.0, {{0.36, 4.0}, {0.24, 15.0}}, {{0.4, 6.0}});
    const TerminalPaths p = simulate_terminal(m, 1.0, 100.0, 95.0, small_config(50'000));
    const double expected = 100.0 * std::exp((0.03 - 0.01) * 1.0);
    EXPECT_NEAR(mean(p.spot), expected, 3.0 * pair_std_error(p.spot));
}

TEST(SimulateTerminal, OccupationTimeLiesInUnitInterval) {
    const TerminalPaths p = simulate_terminal(test::ladder_model(1.0), 0.75, 100.0, 98.0,
                                              small_config());
    for (double occ : p.occupation) {
        EXPECT_GE(occ, 0.0);
        EXPECT_LE(occ, 0.75 + 1e-12);
    }
    EXPECT_GT(*std::max_element(p.occupation.begin(), p.occupation.end()), 0.0);
}

TEST(SimulateTerminal, ZeroBarrierIsNeverVisited) {
    const TerminalPaths p = simulate_terminal(test::ladder_model(5.0), 1.0, 100.0, 0.0,
                                              small_config());
    for (double occ : p.occupation) EXPECT_EQ(occ, 0.0);
}

TEST(SimulateTerminal, SeedDeterminesEveryPath) {
    PathConfig cfg = small_config();
    cfg.threads = 1;
    const TerminalPaths a = simulate_terminal(test::ladder_model(1.0), 1.0, 100.0, 95.0, cfg);
    cfg.threads = 4;
    const TerminalPaths b = simulate_terminal(test::ladder_model(1.0), 1.0, 100.0, 95.0, cfg);
    EXPECT_EQ(a.spot, b.spot);
    EXPECT_EQ(a.occupation, b.occupation);
    cfg.seed += 1;
    const TerminalPaths c = simulate_terminal(test::ladder_model(1.0), 1.0, 100.0, 95.0, cfg);
    EXPECT_NE(a.spot, c.spot);
}

TEST(SimulateTerminal, KernelVariantsAgreeBitForBit) {
    PathConfig cfg = small_config();
    cfg.variant = simd::Variant::scalar;
    const TerminalPaths ref = simulate_terminal(test::ladder_model(1.0), 1.0, 100.0, 95.0, cfg);
    for (simd::Variant v : simd::available_variants()) {
        cfg.variant = v;
        const TerminalPaths p = simulate_terminal(test::ladder_model(1.0), 1.0, 100.0, 95.0, cfg);
        EXPECT_EQ(p.spot, ref.spot) << simd::to_string(v);
        EXPECT_EQ(p.occupation, ref.occupation) << simd::to_string(v);
    }
}

TEST(SimulateTerminal, GridIsRefinedToDivideMaturity) {
    PathConfig cfg = small_config();
    cfg.dt = 1e-3;
    EXPECT_DOUBLE_EQ(simulate_terminal(test::ladder_model(1.0), 0.0105, 100.0, 95.0, cfg).dt,
                     0.0105 / 11.0);
}

TEST(SimulateTerminal, RejectsInvalidConfigs) {
    const HejdModel m = test::ladder_model(1.0);
    PathConfig cfg = small_config();
    cfg.n_paths = 9'999;
    EXPECT_THROW(simulate_terminal(m, 1.0, 100.0, 95.0, cfg), ConfigError);
    cfg = small_config();
    cfg.dt = 2e-3;
    EXPECT_THROW(simulate_terminal(m, 1.0, 100.0, 95.0, cfg), ConfigError);
    cfg = small_config();
    cfg.max_path_steps = 1e6;
    EXPECT_THROW(simulate_terminal(m, 1.0, 100.0, 95.0, cfg), BudgetError);
    EXPECT_THROW(simulate_terminal(m, 0.0, 100.0, 95.0, small_config()), ModelError);
    EXPECT_THROW(simulate_terminal(m, 1.0, -1.0, 95.0, small_config()), ModelError);
}

TEST(McEuroStep, EstimateIsReproducibleAndHasPositiveError) {
    const McEstimate a = mc_euro_step_price(test::ladder_model(1.0), test::ladder_spec(-26.34), 1.0,
                                            100.0, small_config());
    const McEstimate b = mc_euro_step_price(test::ladder_model(1.0), test::ladder_spec(-26.34), 1.0,
                                            100.0, small_config());
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_GT(a.std_error, 0.0);
    EXPECT_EQ(a.n_paths, 20'000u);
    EXPECT_EQ(a.dt, 1e-3);
}

TEST(McEuroStep, NoKnockOutIsTheVanillaPayoffMean) {
    const HejdModel m = test::ladder_model(1.0);
    const TerminalPaths p = simulate_terminal(m, 1.0, 100.0, 95.0, small_config());
    double sum = 0.0;
    for (double s : p.spot) sum += std::max(s - 100.0, 0.0);
    const double vanilla = std::exp(-0.05) * sum / static_cast<double>(p.spot.size());
    const McEstimate est = mc_euro_step_price(m, test::ladder_spec(0.0), 1.0, 100.0, small_config());
    EXPECT_NEAR(est.value, vanilla, 1e-12 * vanilla);
}

TEST(McEuroStep, DiffusionCallMatchesClosedForm) {
    const McEstimate est = mc_euro_step_price(HejdModel::black_scholes(0.05, 0.07, 0.2),
                                              test::ladder_spec(0.0), 1.0, 100.0,
                                              small_config(50'000));
    EXPECT_NEAR(est.value, test::bs_call(100.0, 100.0, 0.05, 0.07, 0.2, 1.0), 3.0 * est.std_error);
}

TEST(McEuroStep, BracketsTheAnalyticStepPrice) {
    const HejdModel m = test::ladder_model(1.0);
    const DownOutStepSpec spec = test::ladder_spec(-26.34);
    const double engine = price_time_domain(m, spec, 1.0, 100.0, Quantity::euro, gs_weights(7));
    const McEstimate est = mc_euro_step_price(m, spec, 1.0, 100.0, small_config(100'000));
    EXPECT_NEAR(est.value, engine, 3.0 * est.std_error);
}

TEST(McEuroStep, HalvingTheStepMovesThePriceLessThanOneError) {
    const HejdModel m = test::ladder_model(1.0);
    const DownOutStepSpec spec = test::ladder_spec(-26.34);
    PathConfig cfg = small_config(100'000);
    const McEstimate coarse = mc_euro_step_price(m, spec, 1.0, 100.0, cfg);
    cfg.dt = 5e-4;
    const McEstimate fine = mc_euro_step_price(m, spec, 1.0, 100.0, cfg);
    EXPECT_LT(std::abs(fine.value - coarse.value), coarse.std_error);
}

TEST(McEuroStep, BarrierLimitBiasShrinksWithStep) {
    // A discretely monitored occupation time misses excursions below L
    // between grid points, so the barrier-limit estimate sits above the
    // continuous-monitoring value 3.374 and approaches it as dt shrinks.
    const HejdModel m = test::ladder_model(1.0);
    const DownOutStepSpec spec = test::ladder_spec(-5e7);
    PathConfig cfg = small_config(100'000);
    const McEstimate coarse = mc_euro_step_price(m, spec, 1.0, 100.0, cfg);
    cfg.dt = 2.5e-4;
    const McEstimate fine = mc_euro_step_price(m, spec, 1.0, 100.0, cfg);
    EXPECT_GT(coarse.value, 3.374);
    EXPECT_LT(fine.value, coarse.value);
    EXPECT_LT(std::abs(fine.value - 3.374), std::abs(coarse.value - 3.374));
}

TEST(McEuroStep, ZeroSpotIsWorthless) {
    const McEstimate est = mc_euro_step_price(test::ladder_model(1.0), test::ladder_spec(-26.34),
                                              1.0, 0.0, small_config());
    EXPECT_EQ(est.value, 0.0);
}

TEST(Duality, HoldsForTheDiffusionModel) {
    const DualityReport rep = verify_duality(HejdModel::black_scholes(0.05, 0.07, 0.2),
                                             test::ladder_spec(-26.34), 1.0, 100.0,
                                             small_config(50'000));
    EXPECT_GT(rep.pooled_se, 0.0);
    EXPECT_LE(std::abs(rep.z_score), 3.0);
    EXPECT_EQ(rep.difference, rep.call.value - rep.put.value);
}

TEST(Duality, HoldsForTheKouModel) {
    const DualityReport rep = verify_duality(test::ladder_model(1.0), test::ladder_spec(-26.34), 1.0,
                                             100.0, small_config(100'000));
    EXPECT_LE(std::abs(rep.z_score), 3.0);
}

TEST(Duality, SelfDualModelUsesIdenticalDynamics) {
    // p = eta / (2 eta + 1) and xi = eta + 1 make the mean jump zero and the
    // Esscher dual equal to the model itself when r = delta.
    const double eta = 20.0;
    const HejdModel m = HejdModel::kou(0.04, 0.04, 0.2, 2.0, eta / (2.0 * eta + 1.0), eta + 1.0, eta);
    const DualModelReport d = dual_model(m);
    EXPECT_EQ(d.model.r(), m.r());
    EXPECT_EQ(d.model.delta(), m.delta());
    EXPECT_NEAR(d.model.lambda(), m.lambda(), 1e-12);
    ASSERT_EQ(d.model.up().size(), 1u);
    ASSERT_EQ(d.model.down().size(), 1u);
    EXPECT_NEAR(d.model.up()[0].rate, m.up()[0].rate, 1e-12);
    EXPECT_NEAR(d.model.up()[0].weight, m.up()[0].weight, 1e-12);
    EXPECT_NEAR(d.model.down()[0].rate, m.down()[0].rate, 1e-12);
    const DualityReport rep =
        verify_duality(m, test::ladder_spec(-26.34), 1.0, 100.0, small_config(50'000));
    EXPECT_LE(std::abs(rep.z_score), 3.0);
}

TEST(Duality, RejectsNonPositiveSpot) {
    EXPECT_THROW(verify_duality(test::ladder_model(1.0), test::ladder_spec(-26.34), 1.0, 0.0,
                                small_config()),
                 ModelError);
}

}  // namespace
}  // namespace hejd
