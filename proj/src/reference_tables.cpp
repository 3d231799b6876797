// SPDX-License-Identifier: Apache-2.0
#include "hejd/reference_tables.hpp"

#include "hejd/errors.hpp"

#include <limits>
#include <string>

namespace hejd {

namespace {

constexpr double kDash = std::numeric_limits<double>::quiet_NaN();

// Row layout: block, lambda, S0, then (Euro, EEP, EEP %, DC %) for the
// standard, step and barrier contracts. Block (1) has lambda = 5 and block (2)
// lambda = 10.

EepTable make_table(int id, double xi, double eta, std::vector<EepRow> rows) {
    EepTable t;
    t.id = id;
    t.setup.xi = xi;
    t.setup.eta = eta;
    t.rows = std::move(rows);
    return t;
}

const std::vector<EepTable>& eep_tables() {
    static const std::vector<EepTable> tables = {
        // Caption: p = 0.5, xi = 50, eta = 25.
        make_table(2, 50.0, 25.0, {
            {1, 5.0, 90, {{{3.500, 0.062, 1.74, 94.20}, {0.268, 0.009, 3.07, 94.32}, {0, 0, kDash, kDash}}}},
            {1, 5.0, 95, {{{5.241, 0.112, 2.09, 94.27}, {1.757, 0.059, 3.23, 94.33}, {0, 0, kDash, kDash}}}},
            {1, 5.0, 100, {{{7.416, 0.190, 2.50, 94.34}, {4.992, 0.178, 3.45, 94.36}, {3.686, 0.165, 4.28, 94.37}}}},
            {1, 5.0, 105, {{{10.011, 0.305, 2.96, 94.40}, {8.309, 0.330, 3.82, 94.39}, {7.305, 0.353, 4.61, 94.40}}}},
            {1, 5.0, 110, {{{12.992, 0.469, 3.48, 94.46}, {11.804, 0.535, 4.34, 94.44}, {11.037, 0.597, 5.13, 94.44}}}},
            {1, 5.0, 115, {{{16.314, 0.691, 4.07, 94.52}, {15.492, 0.811, 4.98, 94.50}, {14.914, 0.920, 5.81, 94.54}}}},
            {2, 10.0, 90, {{{4.098, 0.065, 1.57, 89.68}, {0.344, 0.010, 2.79, 89.87}, {0, 0, kDash, kDash}}}},
            {2, 10.0, 95, {{{5.933, 0.113, 1.87, 89.80}, {2.012, 0.061, 2.93, 89.89}, {0, 0, kDash, kDash}}}},
            {2, 10.0, 100, {{{8.169, 0.186, 2.22, 89.90}, {5.413, 0.175, 3.12, 89.93}, {3.990, 0.161, 3.88, 89.95}}}},
            {2, 10.0, 105, {{{10.791, 0.290, 2.62, 90.00}, {8.791, 0.314, 3.44, 89.99}, {7.683, 0.334, 4.17, 89.99}}}},
            {2, 10.0, 110, {{{13.767, 0.435, 3.06, 90.08}, {12.313, 0.497, 3.88, 90.05}, {11.442, 0.552, 4.60, 90.05}}}},
            {2, 10.0, 115, {{{17.056, 0.628, 3.55, 90.17}, {16.004, 0.738, 4.41, 90.12}, {15.325, 0.835, 5.16, 90.13}}}},
        }),
        // Caption: p = 0.5, xi = 50, eta = 50.
        make_table(3, 50.0, 50.0, {
            {1, 5.0, 90, {{{3.163, 0.064, 1.98, 93.97}, {0.232, 0.008, 3.46, 94.10}, {0, 0, kDash, kDash}}}},
            {1, 5.0, 95, {{{4.835, 0.117, 2.37, 94.05}, {1.588, 0.060, 3.63, 94.12}, {0, 0, kDash, kDash}}}},
            {1, 5.0, 100, {{{6.958, 0.202, 2.82, 94.12}, {4.679, 0.188, 3.87, 94.14}, {3.432, 0.174, 4.82, 94.15}}}},
            {1, 5.0, 105, {{{9.523, 0.328, 3.33, 94.19}, {7.949, 0.355, 4.28, 94.18}, {6.983, 0.382, 5.18, 94.18}}}},
            {1, 5.0, 110, {{{12.498, 0.509, 3.91, 94.25}, {11.430, 0.583, 4.85, 94.23}, {10.702, 0.654, 5.76, 94.24}}}},
            {1, 5.0, 115, {{{15.835, 0.758, 4.57, 94.33}, {15.122, 0.891, 5.57, 94.31}, {14.586, 1.017, 6.52, 94.43}}}},
            {2, 10.0, 90, {{{3.441, 0.068, 1.94, 88.95}, {0.268, 0.009, 3.40, 89.16}, {0, 0, kDash, kDash}}}},
            {2, 10.0, 95, {{{5.155, 0.121, 2.30, 89.08}, {1.685, 0.062, 3.55, 89.19}, {0, 0, kDash, kDash}}}},
            {2, 10.0, 100, {{{7.303, 0.204, 2.72, 89.20}, {4.836, 0.190, 3.77, 89.23}, {3.522, 0.174, 4.71, 89.25}}}},
            {2, 10.0, 105, {{{9.875, 0.325, 3.19, 89.30}, {8.138, 0.352, 4.14, 89.29}, {7.107, 0.377, 5.04, 89.29}}}},
            {2, 10.0, 110, {{{12.839, 0.497, 3.72, 89.40}, {11.636, 0.569, 4.66, 89.36}, {10.845, 0.638, 5.56, 89.37}}}},
            {2, 10.0, 115, {{{16.152, 0.729, 4.32, 89.53}, {15.330, 0.859, 5.31, 89.46}, {14.737, 0.981, 6.24, 89.57}}}},
        }),
        // Caption: p = 0.5, xi = 25, eta = 25. Block (2) is labelled lambda = 5
        // like block (1) but its values are those of lambda = 10.
        make_table(4, 25.0, 25.0, {
            {1, 5.0, 90, {{{3.966, 0.077, 1.91, 76.61}, {0.330, 0.012, 3.37, 77.40}, {0, 0, kDash, kDash}}}},
            {1, 5.0, 95, {{{5.745, 0.131, 2.23, 77.04}, {1.845, 0.066, 3.44, 77.48}, {0, 0, kDash, kDash}}}},
            {1, 5.0, 100, {{{7.931, 0.210, 2.58, 77.42}, {5.151, 0.192, 3.60, 77.62}, {3.748, 0.174, 4.44, 77.79}}}},
            {1, 5.0, 105, {{{10.514, 0.323, 2.98, 77.75}, {8.516, 0.346, 3.90, 77.89}, {7.415, 0.366, 4.70, 78.11}}}},
            {1, 5.0, 110, {{{13.463, 0.479, 3.43, 78.01}, {12.037, 0.544, 4.32, 78.35}, {11.178, 0.603, 5.12, 78.81}}}},
            {1, 5.0, 115, {{{16.740, 0.685, 3.93, 78.17}, {15.730, 0.803, 4.85, 79.21}, {15.069, 0.907, 5.68, 80.34}}}},
            {2, 10.0, 90, {{{4.950, 0.091, 1.81, 64.97}, {0.468, 0.016, 3.20, 65.77}, {0, 0, kDash, kDash}}}},
            {2, 10.0, 95, {{{6.842, 0.144, 2.07, 65.37}, {2.166, 0.073, 3.25, 65.81}, {0, 0, kDash, kDash}}}},
            {2, 10.0, 100, {{{9.098, 0.220, 2.36, 65.74}, {5.678, 0.198, 3.37, 65.91}, {4.077, 0.177, 4.16, 66.01}}}},
            {2, 10.0, 105, {{{11.704, 0.322, 2.68, 66.08}, {9.138, 0.341, 3.60, 66.09}, {7.852, 0.358, 4.35, 66.17}}}},
            {2, 10.0, 110, {{{14.634, 0.458, 3.03, 66.37}, {12.709, 0.518, 3.92, 66.34}, {11.668, 0.571, 4.67, 66.50}}}},
            {2, 10.0, 115, {{{17.857, 0.632, 3.42, 66.60}, {16.419, 0.741, 4.32, 66.73}, {15.583, 0.834, 5.08, 67.20}}}},
        }),
        // Caption: p = 0.5, xi = 25, eta = 50. Block (2) is labelled lambda = 5
        // like block (1) but its values are those of lambda = 10.
        make_table(5, 25.0, 50.0, {
            {1, 5.0, 90, {{{3.645, 0.080, 2.15, 75.53}, {0.294, 0.012, 3.75, 76.36}, {0, 0, kDash, kDash}}}},
            {1, 5.0, 95, {{{5.362, 0.137, 2.49, 75.97}, {1.685, 0.067, 3.82, 76.45}, {0, 0, kDash, kDash}}}},
            {1, 5.0, 100, {{{7.501, 0.222, 2.88, 76.37}, {4.854, 0.202, 3.99, 76.61}, {3.506, 0.182, 4.94, 76.81}}}},
            {1, 5.0, 105, {{{10.054, 0.345, 3.31, 76.71}, {8.177, 0.368, 4.31, 76.94}, {7.110, 0.391, 5.21, 77.25}}}},
            {1, 5.0, 110, {{{12.994, 0.514, 3.80, 76.98}, {11.685, 0.585, 4.77, 77.55}, {10.861, 0.652, 5.67, 78.24}}}},
            {1, 5.0, 115, {{{16.279, 0.740, 4.35, 77.14}, {15.381, 0.870, 5.35, 78.79}, {14.759, 0.989, 6.28, 80.55}}}},
            {2, 10.0, 90, {{{4.347, 0.096, 2.16, 62.58}, {0.391, 0.015, 3.78, 63.44}, {0, 0, kDash, kDash}}}},
            {2, 10.0, 95, {{{6.141, 0.155, 2.45, 63.00}, {1.865, 0.074, 3.82, 63.47}, {0, 0, kDash, kDash}}}},
            {2, 10.0, 100, {{{8.321, 0.238, 2.78, 63.38}, {5.152, 0.212, 3.94, 63.56}, {3.649, 0.188, 4.89, 63.68}}}},
            {2, 10.0, 105, {{{10.878, 0.354, 3.15, 63.72}, {8.549, 0.374, 4.19, 63.76}, {7.328, 0.393, 5.09, 63.90}}}},
            {2, 10.0, 110, {{{13.788, 0.508, 3.55, 64.01}, {12.099, 0.577, 4.55, 64.10}, {11.126, 0.640, 5.44, 64.46}}}},
            {2, 10.0, 115, {{{17.019, 0.709, 4.00, 64.18}, {15.809, 0.834, 5.01, 64.74}, {15.047, 0.946, 5.91, 65.93}}}},
        }),
    };
    return tables;
}

constexpr int kEepTableIds[] = {2, 3, 4, 5};

}  // namespace

double knock_rate(Contract c) noexcept {
    switch (c) {
        case Contract::standard: return 0.0;
        case Contract::step: return kStepKnockRate;
        case Contract::barrier: return kBarrierKnockRate;
    }
    return 0.0;
}

std::string_view to_string(Contract c) noexcept {
    switch (c) {
        case Contract::standard: return "standard";
        case Contract::step: return "step";
        case Contract::barrier: return "barrier";
    }
    return "standard";
}

HejdModel TableSetup::model(double lambda) const {
    return HejdModel::kou(r, delta, sigma, lambda, p_up, xi, eta);
}

DownOutStepSpec TableSetup::spec(Contract c) const {
    DownOutStepSpec s;
    s.strike = strike;
    s.barrier = barrier;
    s.knock_rate = knock_rate(c);
    return s;
}

const LadderTable& ladder_table() {
    // Caption: r = 0.05, delta = 0.07, S0 = K = 100, L = 95, p = 0.7, xi = 25,
    // eta = 50, sigma = 0.2, T = 1. Cells are (Euro, Amer, DC %).
    static const LadderTable table = [] {
        LadderTable t;
        t.setup.p_up = 0.7;
        t.setup.xi = 25.0;
        t.setup.eta = 50.0;
        t.rows = {
            {1.0, {{{6.833, 7.040, 91.52}, {4.596, 4.789, 91.71}, {3.374, 3.551, 91.88}}}},
            {0.1, {{{6.622, 6.822, 99.07}, {4.519, 4.706, 99.09}, {3.338, 3.514, 99.12}}}},
            {0.01, {{{6.600, 6.800, 99.91}, {4.511, 4.698, 99.91}, {3.334, 3.510, 99.91}}}},
            {0.001, {{{6.598, 6.797, 99.99}, {4.510, 4.697, 99.99}, {3.333, 3.509, 99.99}}}},
            {0.0001, {{{6.598, 6.797, 100.00}, {4.510, 4.697, 100.00}, {3.333, 3.509, 100.00}}}},
        };
        // The standard European entry is printed as 6.698; the closed-form
        // Black-Scholes call for these inputs is 6.598, which also matches the
        // lambda -> 0 rows and the printed relative error of 0.001 %.
        t.black_scholes = {{{6.598, 6.885, kDash}, {4.511, 4.745, kDash}, {3.332, 3.529, kDash}}};
        return t;
    }();
    return table;
}

std::span<const int> eep_table_ids() noexcept { return kEepTableIds; }

const EepTable& eep_table(int id) {
    for (const auto& t : eep_tables()) {
        if (t.id == id) return t;
    }
    throw ConfigError("unknown table id " + std::to_string(id) + " (expected 1 to 5)");
}

}  // namespace hejd
