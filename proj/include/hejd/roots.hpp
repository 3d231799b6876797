// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hejd/model.hpp"

#include <vector>

namespace hejd {

/// Search interval used to isolate a single root.
struct RootBracket {
    double lower = 0.0;
    double upper = 0.0;
};

/// Real roots of Phi_X(theta) = alpha for alpha > 0.
///
/// betas[s] is the (s+1)-th positive root, increasing, interlaced with the
/// up-jump rates: 0 < beta_1 < xi_1 < beta_2 < ... < xi_m < beta_{m+1}.
/// gammas[u] is the (u+1)-th negative root, decreasing, interlaced with the
/// negated down-jump rates: gamma_{n+1} < -eta_n < ... < -eta_1 < gamma_1 < 0.
/// When lambda == 0 there is one root of each sign.
struct RootSet {
    double alpha = 0.0;
    std::vector<double> betas;
    std::vector<double> gammas;
    std::vector<RootBracket> beta_brackets;
    std::vector<RootBracket> gamma_brackets;
};

/// Finds all m+n+2 roots by bracketed bisection on each interlacing interval
/// followed by a safeguarded Newton polish.
///
/// Throws BracketError when an interval shows no sign change and
/// ConvergenceError when the residual target cannot be met.
RootSet find_roots(const HejdModel& model, double alpha);

/// Largest |root| in the set.
double max_root_magnitude(const RootSet& roots) noexcept;

}  // namespace hejd
