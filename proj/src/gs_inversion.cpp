// SPDX-License-Identifier: Apache-2.0
#include "hejd/gs_inversion.hpp"

#include "hejd/errors.hpp"

#include <array>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>
#include <string>

namespace hejd {

namespace {

__extension__ using Int = __int128;

Int binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    Int c = 1;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

// Binary128 accumulator: the weights alternate in sign and reach 1.2e11 at
// N = 10, so double accumulation loses up to 1e-5 absolute.
__extension__ using Quad = __float128;

struct Weights {
    std::vector<double> hi;
    std::vector<double> lo;
};

Weights compute_weights(int order) {
    Int factorial = 1;
    for (int i = 2; i <= order; ++i) factorial *= i;
    Weights w;
    for (int k = 1; k <= 2 * order; ++k) {
        Int sum = 0;
        for (int j = (k + 1) / 2; j <= std::min(k, order); ++j) {
            Int power = 1;
            for (int e = 0; e <= order; ++e) power *= j;
            sum += power * binomial(order, j) * binomial(2 * j, j) * binomial(j, k - j);
        }
        if ((order + k) % 2 != 0) sum = -sum;
        // The numerator is below 2^113, so the quotient is the correctly
        // rounded binary128 weight.
        const Quad q = static_cast<Quad>(sum) / static_cast<Quad>(factorial * k);
        const double hi = static_cast<double>(q);
        w.hi.push_back(hi);
        w.lo.push_back(static_cast<double>(q - static_cast<Quad>(hi)));
    }
    return w;
}

Quad weight(const GsConfig& cfg, std::size_t k) {
    return static_cast<Quad>(cfg.zeta[k]) + static_cast<Quad>(cfg.zeta_lo[k]);
}

const Weights& cached_weights(int order) {
    static const std::array<Weights, kMaxGsOrder> table = [] {
        std::array<Weights, kMaxGsOrder> t;
        for (int n = 1; n <= kMaxGsOrder; ++n) t[static_cast<std::size_t>(n - 1)] = compute_weights(n);
        return t;
    }();
    return table[static_cast<std::size_t>(order - 1)];
}

std::string abscissa_context(double theta) {
    std::ostringstream os;
    os.precision(17);
    os << "theta_k = " << theta;
    return os.str();
}

// Evaluates f at every abscissa (optionally concurrently) and returns the
// values in k order. Errors carry the abscissa that produced them.
template <typename F>
auto evaluate_nodes(const F& f, double t, const GsConfig& cfg) {
    using R = decltype(f(1.0));
    const std::vector<double> nodes = gs_abscissae(t, cfg.order);
    auto guarded = [&f](double theta) -> R {
        try {
            return f(theta);
        } catch (const Error& e) {
            e.rethrow_with_context(abscissa_context(theta));
        }
        throw;  // not reached: rethrow_with_context never returns
    };
    std::vector<R> values;
    values.reserve(nodes.size());
    if (cfg.parallel) {
        std::vector<std::future<R>> jobs;
        jobs.reserve(nodes.size());
        for (double theta : nodes) jobs.push_back(std::async(std::launch::async, guarded, theta));
        for (auto& j : jobs) values.push_back(j.get());
    } else {
        for (double theta : nodes) values.push_back(guarded(theta));
    }
    return values;
}

void check_config(double t, const GsConfig& cfg) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ModelError("maturity t must be finite and > 0");
    if (cfg.order < 1 || cfg.order > kMaxGsOrder ||
        cfg.zeta.size() != static_cast<std::size_t>(2 * cfg.order) ||
        cfg.zeta_lo.size() != cfg.zeta.size()) {
        throw OrderError("Gaver-Stehfest config is inconsistent; build it with gs_weights");
    }
}

constexpr std::size_t kQuoteFields = 4;

// Euro value and the continued premium split at one abscissa, plus whether
// the spot lies in that abscissa's exercise region.
struct RandomizedQuote {
    std::array<double, kQuoteFields> fields{};
    bool exercised = false;
};

RandomizedQuote randomized_quote(const HejdModel& model, const DownOutStepSpec& spec, double theta,
                                 double x, bool american) {
    RandomizedQuote out;
    const MrEuropeanSolution euro = solve_european_mr(model, spec, theta);
    out.fields[0] = eval_european_mr(euro, x);
    if (!american) return out;
    const MrAmericanSolution amer = solve_american_mr(model, spec, euro);
    const EepSplit split = eval_continued_eep_split_mr(amer, x);
    out.fields[1] = split.total;
    out.fields[2] = split.diffusion;
    out.fields[3] = split.jump;
    out.exercised = x >= amer.boundary;
    return out;
}

}  // namespace

GsConfig gs_weights(int order) {
    if (order < 1 || order > kMaxGsOrder) {
        throw OrderError("Gaver-Stehfest order must be in [1, " + std::to_string(kMaxGsOrder) +
                         "], got " + std::to_string(order));
    }
    GsConfig cfg;
    cfg.order = order;
    const Weights& w = cached_weights(order);
    cfg.zeta = w.hi;
    cfg.zeta_lo = w.lo;
    return cfg;
}

double gs_weight_sum(const GsConfig& cfg) {
    Quad sum = 0;
    for (std::size_t k = 0; k < cfg.zeta.size() && k < cfg.zeta_lo.size(); ++k) {
        sum += weight(cfg, k);
    }
    return static_cast<double>(sum);
}

std::vector<double> gs_abscissae(double t, int order) {
    std::vector<double> nodes(static_cast<std::size_t>(2 * order));
    for (int k = 1; k <= 2 * order; ++k) {
        nodes[static_cast<std::size_t>(k - 1)] = k * std::numbers::ln2 / t;
    }
    return nodes;
}

double gs_invert(const std::function<double(double)>& transform, double t, const GsConfig& cfg) {
    check_config(t, cfg);
    const std::vector<double> values = evaluate_nodes(transform, t, cfg);
    Quad sum = 0;
    for (std::size_t k = 0; k < values.size(); ++k) sum += weight(cfg, k) * values[k];
    return static_cast<double>(sum);
}

Quantity parse_quantity(std::string_view name) {
    if (name == "euro") return Quantity::euro;
    if (name == "amer") return Quantity::amer;
    if (name == "eep") return Quantity::eep;
    if (name == "eep_diffusion") return Quantity::eep_diffusion;
    if (name == "eep_jump") return Quantity::eep_jump;
    throw ConfigError("unknown quantity '" + std::string(name) +
                      "' (expected euro, amer, eep, eep_diffusion or eep_jump)");
}

std::string_view to_string(Quantity q) noexcept {
    switch (q) {
        case Quantity::euro: return "euro";
        case Quantity::amer: return "amer";
        case Quantity::eep: return "eep";
        case Quantity::eep_diffusion: return "eep_diffusion";
        case Quantity::eep_jump: return "eep_jump";
    }
    return "euro";
}

double TimeDomainQuote::eep_percent() const noexcept { return amer != 0.0 ? 100.0 * eep / amer : 0.0; }

double TimeDomainQuote::diffusion_percent() const noexcept {
    return eep != 0.0 ? 100.0 * eep_diffusion / eep : 0.0;
}

TimeDomainQuote quote_time_domain(const HejdModel& model, const DownOutStepSpec& spec, double t,
                                  double x, const GsConfig& cfg, bool include_american) {
    check_config(t, cfg);
    spec.validate();
    TimeDomainQuote q;
    if (!(x > 0.0)) return q;
    const auto values = evaluate_nodes(
        [&](double theta) { return randomized_quote(model, spec, theta, x, include_american); }, t,
        cfg);
    std::array<Quad, kQuoteFields> sum{};
    bool exercised_everywhere = true;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const Quad z = weight(cfg, k);
        for (std::size_t f = 0; f < kQuoteFields; ++f) sum[f] += z * values[k].fields[f];
        exercised_everywhere = exercised_everywhere && values[k].exercised;
    }
    const double euro = static_cast<double>(sum[0]);
    const double season = seasoned_price(1.0, spec);
    q.euro = season * euro;
    if (!include_american) return q;
    // Each abscissa has its own boundary b*(theta_k); switching to the payoff
    // at each one puts a kink into the transform that the alternating weights
    // amplify by up to 1e7. The continued premium is smooth in theta, and the
    // spot belongs to the exercise region once the inverted continuation value
    // drops below the payoff.
    const double payoff = x - spec.strike;
    double eep = static_cast<double>(sum[1]);
    double diffusion = static_cast<double>(sum[2]);
    double jump = static_cast<double>(sum[3]);
    if (exercised_everywhere || euro + eep < payoff) {
        eep = payoff - euro;
        diffusion = 0.0;
        jump = eep;
    }
    q.amer = season * (euro + eep);
    q.eep = season * eep;
    q.eep_diffusion = season * diffusion;
    q.eep_jump = season * jump;
    return q;
}

double price_time_domain(const HejdModel& model, const DownOutStepSpec& spec, double t, double x,
                         Quantity quantity, const GsConfig& cfg) {
    const TimeDomainQuote q =
        quote_time_domain(model, spec, t, x, cfg, quantity != Quantity::euro);
    switch (quantity) {
        case Quantity::euro: return q.euro;
        case Quantity::amer: return q.amer;
        case Quantity::eep: return q.eep;
        case Quantity::eep_diffusion: return q.eep_diffusion;
        case Quantity::eep_jump: return q.eep_jump;
    }
    return q.euro;
}

}  // namespace hejd
