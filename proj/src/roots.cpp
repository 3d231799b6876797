// SPDX-License-Identifier: Apache-2.0
#include "hejd/roots.hpp"

#include "hejd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hejd {

namespace {

constexpr double kPoleOffset = 1e-9;   // times the gap between neighbouring poles
constexpr double kOffsetShrink = 1e-3;
constexpr int kMaxDoublings = 60;
constexpr int kMaxIterations = 200;
constexpr double kPolishTol = 1e-12;

// Phi_X(theta) - alpha without the pole guard; brackets may sit closer to a
// pole than laplace_exponent tolerates.
// Phi(theta) - alpha accumulated in long double: near the poles and at large
// |theta| the terms cancel heavily and the double sum misses the residual
// target by a few ulps.
double excess(const HejdModel& model, double theta, double alpha) noexcept {
    using L = long double;
    const L t = theta;
    const L s2 = static_cast<L>(model.sigma()) * model.sigma();
    L zeta = 0.0L;
    L jumps = 0.0L;
    for (const auto& c : model.active_up()) {
        zeta += c.weight / (c.rate - 1.0L);
        jumps += c.weight * t / (c.rate - t);
    }
    for (const auto& c : model.active_down()) {
        zeta -= c.weight / (c.rate + 1.0L);
        jumps -= c.weight * t / (c.rate + t);
    }
    const L lambda = model.lambda();
    const L drift = static_cast<L>(model.r()) - model.delta() - lambda * zeta - s2 / 2.0L;
    return static_cast<double>(drift * t + s2 * t * t / 2.0L + lambda * jumps - alpha);
}

enum class End { zero, pole, infinite };

std::string describe(double lo, double hi) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << lo << ", " << hi << ")";
    return os.str();
}

// Shrinks an open interval whose ends are poles, zero or infinity to a finite
// bracket with a sign change.
RootBracket isolate(const HejdModel& model, double alpha, double lo, End lo_kind, double hi,
                    End hi_kind) {
    if (lo_kind == End::infinite) {
        // sigma^2 theta^2 / 2 dominates: Phi - alpha is positive beyond the root.
        double step = std::max(1.0, std::abs(hi));
        for (int k = 0; k <= kMaxDoublings; ++k, step *= 2.0) {
            const double cand = hi - step;
            if (excess(model, cand, alpha) > 0.0) {
                lo = cand;
                lo_kind = End::zero;
                break;
            }
        }
        if (lo_kind == End::infinite) {
            throw BracketError("no sign change below " + describe(-step, hi));
        }
    }
    if (hi_kind == End::infinite) {
        double step = std::max(1.0, std::abs(lo));
        for (int k = 0; k <= kMaxDoublings; ++k, step *= 2.0) {
            const double cand = lo + step;
            if (excess(model, cand, alpha) > 0.0) {
                hi = cand;
                hi_kind = End::zero;
                break;
            }
        }
        if (hi_kind == End::infinite) {
            throw BracketError("no sign change above " + describe(lo, step));
        }
    }

    const double gap = hi - lo;
    double lo_off = lo_kind == End::pole ? kPoleOffset * gap : 0.0;
    double hi_off = hi_kind == End::pole ? kPoleOffset * gap : 0.0;
    for (;;) {
        const double a = lo + lo_off;
        const double b = hi - hi_off;
        if (excess(model, a, alpha) * excess(model, b, alpha) < 0.0) return {a, b};
        // The root can hug a pole when its jump component is tiny.
        // The last candidate is the double adjacent to the pole: with a tiny
        // intensity the root can sit a few ulps away from it.
        const double lo_ulp = lo_kind == End::pole ? std::nextafter(lo, hi) - lo : 0.0;
        const double hi_ulp = hi_kind == End::pole ? hi - std::nextafter(hi, lo) : 0.0;
        const bool can_shrink_lo = lo_off > lo_ulp;
        const bool can_shrink_hi = hi_off > hi_ulp;
        if (!can_shrink_lo && !can_shrink_hi) {
            throw BracketError("no sign change of Phi - alpha on " + describe(lo, hi));
        }
        if (can_shrink_lo) lo_off = std::max(lo_off * kOffsetShrink, lo_ulp);
        if (can_shrink_hi) hi_off = std::max(hi_off * kOffsetShrink, hi_ulp);
    }
}

double polish(const HejdModel& model, double alpha, RootBracket bracket) {
    double lo = bracket.lower;
    double hi = bracket.upper;
    double f_lo = excess(model, lo, alpha);
    const double tol = kPolishTol * std::max(1.0, alpha);
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < kMaxIterations; ++it) {
        const double fx = excess(model, x, alpha);
        if (std::abs(fx) <= tol) return x;
        if ((fx < 0.0) == (f_lo < 0.0)) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
        }
        if (std::nextafter(lo, hi) >= hi) {
            // Bracket collapsed onto adjacent doubles: best representable root.
            return std::abs(excess(model, lo, alpha)) < std::abs(excess(model, hi, alpha)) ? lo
                                                                                         : hi;
        }
        const double slope = laplace_exponent_derivative(model, x);
        const double newton = x - fx / slope;
        const bool newton_ok = std::isfinite(newton) && newton > lo && newton < hi &&
                               std::abs(newton - x) < 0.5 * (hi - lo);
        x = newton_ok ? newton : 0.5 * (lo + hi);
    }
    std::ostringstream os;
    os.precision(17);
    os << "root polish did not converge on " << describe(bracket.lower, bracket.upper)
       << " for alpha " << alpha;
    throw ConvergenceError(os.str());
}

}  // namespace

RootSet find_roots(const HejdModel& model, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw BracketError("find_roots requires a finite alpha > 0");
    }
    RootSet out;
    out.alpha = alpha;

    const auto up = model.active_up();
    const auto down = model.active_down();

    // Positive branch: (0, xi_1), (xi_1, xi_2), ..., (xi_m, inf).
    for (std::size_t s = 0; s <= up.size(); ++s) {
        const double lo = s == 0 ? 0.0 : up[s - 1].rate;
        const End lo_kind = s == 0 ? End::zero : End::pole;
        const double hi = s < up.size() ? up[s].rate : std::numeric_limits<double>::infinity();
        const End hi_kind = s < up.size() ? End::pole : End::infinite;
        const RootBracket b = isolate(model, alpha, lo, lo_kind, hi, hi_kind);
        out.beta_brackets.push_back(b);
        out.betas.push_back(polish(model, alpha, b));
    }
    // Negative branch: (-eta_1, 0), (-eta_2, -eta_1), ..., (-inf, -eta_n).
    for (std::size_t u = 0; u <= down.size(); ++u) {
        const double hi = u == 0 ? 0.0 : -down[u - 1].rate;
        const End hi_kind = u == 0 ? End::zero : End::pole;
        const double lo = u < down.size() ? -down[u].rate : -std::numeric_limits<double>::infinity();
        const End lo_kind = u < down.size() ? End::pole : End::infinite;
        const RootBracket b = isolate(model, alpha, lo, lo_kind, hi, hi_kind);
        out.gamma_brackets.push_back(b);
        out.gammas.push_back(polish(model, alpha, b));
    }
    return out;
}

double max_root_magnitude(const RootSet& roots) noexcept {
    double m = 0.0;
    for (double b : roots.betas) m = std::max(m, std::abs(b));
    for (double g : roots.gammas) m = std::max(m, std::abs(g));
    return m;
}

}  // namespace hejd
