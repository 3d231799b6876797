// SPDX-License-Identifier: Apache-2.0
#include "hejd/mc_oracle.hpp"

#include "hejd/errors.hpp"
#include "hejd/philox.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

namespace hejd {

namespace {

constexpr std::size_t kBatchUnits = 512;

enum Stream : std::uint32_t { kDiffusion = 0, kArrival = 1, kMark = 2, kBridge = 3 };

struct Grid {
    std::uint64_t steps = 0;
    double dt = 0.0;
};

Grid make_grid(double t, const PathConfig& cfg) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ModelError("maturity T must be finite and > 0");
    if (!(cfg.dt > 0.0) || cfg.dt > kMaxDt) {
        throw ConfigError("dt must be in (0, 1e-3]");
    }
    if (cfg.n_paths < kMinPaths) throw ConfigError("n_paths must be at least 10000");
    Grid g;
    g.steps = static_cast<std::uint64_t>(std::ceil(t / cfg.dt - 1e-9));
    g.steps = std::max<std::uint64_t>(g.steps, 1);
    g.dt = t / static_cast<double>(g.steps);
    const double work = static_cast<double>(cfg.n_paths) * static_cast<double>(g.steps);
    if (work > cfg.max_path_steps) {
        std::ostringstream os;
        os << "path budget exceeded: " << work << " path-steps > " << cfg.max_path_steps;
        throw BudgetError(os.str());
    }
    return g;
}

// Jump process of one sampling unit: shared by both lanes of an antithetic pair.
class JumpClock {
public:
    JumpClock(const HejdModel& model, Philox4x32::Key key, std::uint32_t unit)
        : model_(&model), key_(key), unit_(unit) {
        next_ = model.lambda() > 0.0 ? draw_wait() : std::numeric_limits<double>::infinity();
    }

    double next() const noexcept { return next_; }

    struct Event {
        double time;
        double size;
        double bridge_normal;
    };

    Event pop() noexcept {
        const auto [u_size, u_unused] =
            block_to_unit(Philox4x32::generate({index_, unit_, kMark, 0}, key_));
        (void)u_unused;
        const auto [b1, b2] = block_to_unit(Philox4x32::generate({index_, unit_, kBridge, 0}, key_));
        const double normal = box_muller(b1, b2).first;
        const double size = mark(u_component_, -std::log(u_size));
        Event ev{next_, size, normal};
        ++index_;
        next_ += draw_wait();
        return ev;
    }

private:
    double draw_wait() noexcept {
        const auto [u_time, u_comp] =
            block_to_unit(Philox4x32::generate({index_, unit_, kArrival, 0}, key_));
        u_component_ = u_comp;
        return -std::log(u_time) / model_->lambda();
    }

    double mark(double u, double expo) const noexcept {
        double acc = 0.0;
        for (const auto& c : model_->up()) {
            acc += c.weight;
            if (u <= acc) return expo / c.rate;
        }
        for (const auto& c : model_->down()) {
            acc += c.weight;
            if (u <= acc) return -expo / c.rate;
        }
        // Rounding in the cumulative weights: fall back to the last component.
        if (!model_->down().empty()) return -expo / model_->down().back().rate;
        return expo / model_->up().back().rate;
    }

    const HejdModel* model_;
    Philox4x32::Key key_;
    std::uint32_t unit_;
    std::uint32_t index_ = 0;
    double next_;
    double u_component_ = 0.0;
};

struct SimulationSetup {
    double log_s0 = 0.0;
    double log_barrier = 0.0;
    bool count_above = false;
    double maturity = 0.0;
};

// Visitor receives (batch, first_unit, units, lanes_per_unit, x, occ).
using BatchVisitor = std::function<void(std::size_t, std::uint64_t, std::size_t, std::size_t,
                                        const std::vector<double>&, const std::vector<double>&)>;

std::uint64_t unit_count(const PathConfig& cfg) {
    return cfg.antithetic ? (cfg.n_paths + 1) / 2 : cfg.n_paths;
}

void simulate_batch(const HejdModel& model, const SimulationSetup& setup, const Grid& grid,
                    const PathConfig& cfg, std::uint64_t first_unit, std::size_t units,
                    std::vector<double>& x, std::vector<double>& occ) {
    const std::size_t lanes_per_unit = cfg.antithetic ? 2 : 1;
    const std::size_t lanes = units * lanes_per_unit;
    const Philox4x32::Key key{static_cast<std::uint32_t>(cfg.seed),
                              static_cast<std::uint32_t>(cfg.seed >> 32)};
    const double mu = model.drift();
    const double sigma = model.sigma();
    simd::StepParams params;
    params.drift_dt = mu * grid.dt;
    params.vol_sqrt_dt = sigma * std::sqrt(grid.dt);
    params.barrier = setup.log_barrier;
    params.dt = grid.dt;
    params.count_above = setup.count_above;
    const simd::StepFn step = simd::step_function(cfg.variant);

    x.assign(lanes, setup.log_s0);
    occ.assign(lanes, 0.0);
    std::vector<double> z(lanes);
    std::vector<Philox4x32::Block> blocks(units);
    std::vector<std::array<double, 4>> normals(units);
    std::vector<JumpClock> clocks;
    clocks.reserve(units);
    for (std::size_t u = 0; u < units; ++u) {
        clocks.emplace_back(model, key, static_cast<std::uint32_t>(first_unit + u));
    }
    std::vector<std::size_t> jumping;
    std::vector<double> x_old;

    auto inside = [&](double v) {
        return setup.count_above ? v > setup.log_barrier : v < setup.log_barrier;
    };

    for (std::uint64_t s = 0; s < grid.steps; ++s) {
        // One block feeds four consecutive steps of a unit.
        const std::size_t slot = static_cast<std::size_t>(s % 4);
        if (slot == 0) {
            const auto ctr = static_cast<std::uint32_t>(s / 4);
            for (std::size_t u = 0; u < units; ++u) {
                blocks[u] = Philox4x32::generate(
                    {ctr, static_cast<std::uint32_t>(first_unit + u), kDiffusion, 0}, key);
            }
            for (std::size_t u = 0; u < units; ++u) normals[u] = block_to_normals(blocks[u]);
        }
        if (cfg.antithetic) {
            for (std::size_t u = 0; u < units; ++u) {
                z[2 * u] = normals[u][slot];
                z[2 * u + 1] = -normals[u][slot];
            }
        } else {
            for (std::size_t u = 0; u < units; ++u) z[u] = normals[u][slot];
        }

        const double start = static_cast<double>(s) * grid.dt;
        const double end = s + 1 == grid.steps ? setup.maturity
                                               : static_cast<double>(s + 1) * grid.dt;
        jumping.clear();
        x_old.clear();
        for (std::size_t u = 0; u < units; ++u) {
            if (clocks[u].next() <= end) {
                jumping.push_back(u);
                for (std::size_t l = 0; l < lanes_per_unit; ++l) {
                    x_old.push_back(x[u * lanes_per_unit + l]);
                }
            }
        }

        step(params, x.data(), occ.data(), z.data(), lanes);

        // Steps containing jumps are redone exactly: Brownian bridge to each
        // jump time, then the remaining increment; the occupation indicator is
        // switched from the jump time onwards.
        for (std::size_t k = 0; k < jumping.size(); ++k) {
            const std::size_t u = jumping[k];
            double xc[2];
            double remaining[2];
            bool ind[2];
            for (std::size_t l = 0; l < lanes_per_unit; ++l) {
                xc[l] = x_old[k * lanes_per_unit + l];
                remaining[l] = params.vol_sqrt_dt * z[u * lanes_per_unit + l];
                ind[l] = inside(xc[l]);
            }
            double c = start;
            while (clocks[u].next() <= end) {
                const JumpClock::Event ev = clocks[u].pop();
                const double span = end - c;
                const double w = span > 0.0 ? (ev.time - c) / span : 1.0;
                const double sd = span > 0.0
                                      ? sigma * std::sqrt((ev.time - c) * (end - ev.time) / span)
                                      : 0.0;
                for (std::size_t l = 0; l < lanes_per_unit; ++l) {
                    const double sign = l == 0 ? 1.0 : -1.0;
                    const double db = w * remaining[l] + sd * sign * ev.bridge_normal;
                    xc[l] = xc[l] + mu * (ev.time - c) + db + ev.size;
                    remaining[l] -= db;
                    const bool now = inside(xc[l]);
                    if (now != ind[l]) {
                        double& o = occ[u * lanes_per_unit + l];
                        o += (now ? 1.0 : -1.0) * (end - ev.time);
                        ind[l] = now;
                    }
                }
                c = ev.time;
            }
            for (std::size_t l = 0; l < lanes_per_unit; ++l) {
                x[u * lanes_per_unit + l] = xc[l] + mu * (end - c) + remaining[l];
            }
        }
    }
    for (double& o : occ) o = std::clamp(o, 0.0, setup.maturity);
}

void run_paths(const HejdModel& model, const SimulationSetup& setup, const Grid& grid,
               const PathConfig& cfg, const BatchVisitor& visit) {
    const std::uint64_t units = unit_count(cfg);
    if (units > std::numeric_limits<std::uint32_t>::max()) {
        throw BudgetError("too many paths for the 32-bit path counter");
    }
    const std::size_t batches = static_cast<std::size_t>((units + kBatchUnits - 1) / kBatchUnits);
    unsigned workers = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(std::max<std::size_t>(batches, 1)));
    const std::size_t lanes_per_unit = cfg.antithetic ? 2 : 1;

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        std::vector<double> x;
        std::vector<double> occ;
        for (std::size_t b = next++; b < batches; b = next++) {
            const std::uint64_t first = b * kBatchUnits;
            const std::size_t count = static_cast<std::size_t>(
                std::min<std::uint64_t>(kBatchUnits, units - first));
            simulate_batch(model, setup, grid, cfg, first, count, x, occ);
            visit(b, first, count, lanes_per_unit, x, occ);
        }
    };
    if (workers == 1) {
        work();
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
}

struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
};

// Discounted payoff estimator: one sample per unit (lane average).
McEstimate estimate(const HejdModel& model, const SimulationSetup& setup, const PathConfig& cfg,
                    double t, const std::function<double(double, double)>& payoff) {
    const Grid grid = make_grid(t, cfg);
    const std::uint64_t units = unit_count(cfg);
    std::vector<Moments> partial((units + kBatchUnits - 1) / kBatchUnits);
    run_paths(model, setup, grid, cfg,
              [&](std::size_t b, std::uint64_t, std::size_t count, std::size_t lanes,
                  const std::vector<double>& x, const std::vector<double>& occ) {
                  Moments m;
                  for (std::size_t u = 0; u < count; ++u) {
                      double v = 0.0;
                      for (std::size_t l = 0; l < lanes; ++l) {
                          v += payoff(x[u * lanes + l], occ[u * lanes + l]);
                      }
                      v /= static_cast<double>(lanes);
                      m.sum += v;
                      m.sum_sq += v * v;
                  }
                  partial[b] = m;
              });
    Moments total;
    for (const Moments& m : partial) {
        total.sum += m.sum;
        total.sum_sq += m.sum_sq;
    }
    const double n = static_cast<double>(units);
    const double mean = total.sum / n;
    const double var = std::max(total.sum_sq / n - mean * mean, 0.0) * n / (n - 1.0);
    McEstimate est;
    est.value = mean;
    est.std_error = std::sqrt(var / n);
    est.n_paths = units * (cfg.antithetic ? 2 : 1);
    est.dt = grid.dt;
    return est;
}

double safe_log(double v) {
    return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
}

}  // namespace

TerminalPaths simulate_terminal(const HejdModel& model, double t, double s0, double barrier,
                                const PathConfig& cfg) {
    if (!(s0 > 0.0)) throw ModelError("initial spot must be > 0");
    const Grid grid = make_grid(t, cfg);
    SimulationSetup setup{std::log(s0), safe_log(barrier), false, t};
    const std::size_t lanes_per_unit = cfg.antithetic ? 2 : 1;
    const std::size_t total = static_cast<std::size_t>(unit_count(cfg)) * lanes_per_unit;
    TerminalPaths out;
    out.spot.resize(total);
    out.occupation.resize(total);
    out.dt = grid.dt;
    run_paths(model, setup, grid, cfg,
              [&](std::size_t, std::uint64_t first, std::size_t count, std::size_t lanes,
                  const std::vector<double>& x, const std::vector<double>& occ) {
                  const std::size_t offset = static_cast<std::size_t>(first) * lanes;
                  for (std::size_t i = 0; i < count * lanes; ++i) {
                      out.spot[offset + i] = std::exp(x[i]);
                      out.occupation[offset + i] = occ[i];
                  }
              });
    return out;
}

McEstimate mc_euro_step_price(const HejdModel& model, const DownOutStepSpec& spec, double t,
                              double x, const PathConfig& cfg) {
    spec.validate();
    if (!(x > 0.0)) return {0.0, 0.0, cfg.n_paths, cfg.dt};
    SimulationSetup setup{std::log(x), safe_log(spec.barrier), false, t};
    const double disc = std::exp(-model.r() * t);
    const double strike = spec.strike;
    const double rho = spec.knock_rate;
    return estimate(model, setup, cfg, t, [=](double xt, double occ) {
        const double pay = std::exp(xt) - strike;
        return pay > 0.0 ? disc * std::exp(rho * occ) * pay : 0.0;
    });
}

McEstimate mc_euro_up_step_put(const HejdModel& model, double strike, double upper_barrier,
                               double knock_rate, double t, double x, const PathConfig& cfg) {
    if (!(x > 0.0)) throw ModelError("initial spot must be > 0");
    SimulationSetup setup{std::log(x), safe_log(upper_barrier), true, t};
    const double disc = std::exp(-model.r() * t);
    return estimate(model, setup, cfg, t, [=](double xt, double occ) {
        const double pay = strike - std::exp(xt);
        return pay > 0.0 ? disc * std::exp(knock_rate * occ) * pay : 0.0;
    });
}

DualityReport verify_duality(const HejdModel& model, const DownOutStepSpec& spec, double t,
                             double x, const PathConfig& cfg) {
    spec.validate();
    if (!(x > 0.0)) throw ModelError("initial spot must be > 0");
    DualityReport rep;
    rep.call = mc_euro_step_price(model, spec, t, x, cfg);
    const DualModelReport dual = dual_model(model);
    const double upper = spec.barrier > 0.0 ? x * spec.strike / spec.barrier
                                            : std::numeric_limits<double>::infinity();
    PathConfig put_cfg = cfg;
    put_cfg.seed = cfg.seed ^ 0x9E3779B97F4A7C15ull;  // independent stream for the dual side
    rep.put = mc_euro_up_step_put(dual.model, x, upper, spec.knock_rate, t, spec.strike, put_cfg);
    rep.difference = rep.call.value - rep.put.value;
    rep.pooled_se = std::hypot(rep.call.std_error, rep.put.std_error);
    rep.z_score = rep.pooled_se > 0.0 ? rep.difference / rep.pooled_se : 0.0;
    return rep;
}

}  // namespace hejd
