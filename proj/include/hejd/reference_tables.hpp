// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hejd/model.hpp"

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace hejd {

/// The three contracts every reference table compares: no knock-out, the
/// step contract, and the step contract with a knock-out rate large enough to
/// act as a barrier.
enum class Contract { standard, step, barrier };

inline constexpr std::array<Contract, 3> kContracts = {Contract::standard, Contract::step,
                                                       Contract::barrier};
inline constexpr double kStepKnockRate = -26.34;
inline constexpr double kBarrierKnockRate = -5e7;

double knock_rate(Contract c) noexcept;
std::string_view to_string(Contract c) noexcept;

/// Kou market and contract shared by a table: S0 and lambda vary by row.
struct TableSetup {
    double r = 0.05;
    double delta = 0.07;
    double sigma = 0.2;
    double strike = 100.0;
    double barrier = 95.0;
    double p_up = 0.5;
    double xi = 0.0;
    double eta = 0.0;
    double maturity = 1.0;

    HejdModel model(double lambda) const;
    DownOutStepSpec spec(Contract c) const;
};

/// Published values of one contract in the lambda-ladder table.
struct LadderCell {
    double euro = 0.0;
    double amer = 0.0;
    double dc_percent = 0.0;
};

struct LadderRow {
    double lambda = 0.0;
    std::array<LadderCell, 3> cells;  ///< indexed by Contract
};

/// Id 1: convergence to the diffusion model as lambda shrinks, S0 = 100.
struct LadderTable {
    TableSetup setup;
    double spot = 100.0;
    std::vector<LadderRow> rows;
    /// Diffusion-model reference values (euro, amer) per contract; dc_percent
    /// is not published and is NaN.
    std::array<LadderCell, 3> black_scholes;
};

/// Published values of one contract in an early-exercise-structure table.
/// eep_percent and dc_percent are NaN where the table prints a dash.
struct EepCell {
    double euro = 0.0;
    double eep = 0.0;
    double eep_percent = 0.0;
    double dc_percent = 0.0;
};

struct EepRow {
    int block = 1;
    double lambda = 0.0;
    double spot = 0.0;
    std::array<EepCell, 3> cells;  ///< indexed by Contract
};

/// Ids 2 to 5: early exercise structure over S0 for two jump intensities.
/// Ids 2 and 3 have xi = 50 with eta = 25 and 50; ids 4 and 5 have xi = 25 with
/// eta = 25 and 50.
struct EepTable {
    int id = 0;
    TableSetup setup;
    std::vector<EepRow> rows;
};

const LadderTable& ladder_table();

/// Ids accepted by eep_table.
std::span<const int> eep_table_ids() noexcept;

/// Throws ConfigError for an unknown id.
const EepTable& eep_table(int id);

}  // namespace hejd
