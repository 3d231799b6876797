// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hejd/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace hejd {

/// Market and contract read from a flat `key = value` file.
///
/// Keys: r, delta, sigma, lambda, p, xi, q, eta, K, L, rho_L, gamma_L. The
/// mixture keys take comma-separated lists and may be spelled with a trailing
/// `[]`. `#` starts a comment. r, delta, sigma and K are required; lambda, L,
/// rho_L and gamma_L default to 0. Unknown or repeated keys are errors.
struct ContractConfig {
    HejdModel model;
    DownOutStepSpec spec;
};

/// Throws ConfigError on syntax problems and ModelError on invalid values.
ContractConfig parse_config(std::string_view text, std::string_view source = "<config>");

ContractConfig load_config(const std::filesystem::path& path);

/// Inverse of parse_config; numbers are written with 17 significant digits so
/// the round trip is exact.
std::string serialize_config(const HejdModel& model, const DownOutStepSpec& spec);

}  // namespace hejd
