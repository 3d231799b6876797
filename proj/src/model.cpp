// SPDX-License-Identifier: Apache-2.0
#include "hejd/model.hpp"

#include "hejd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace hejd {

namespace {

constexpr double kMixtureSumTol = 1e-12;
constexpr double kPoleRelTol = 1e-14;

void check_components(const std::vector<JumpComponent>& comps, const char* side,
                      double min_rate) {
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const auto& c = comps[i];
        if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
            throw ModelError(std::string(side) + " jump weights must be positive");
        }
        if (!(c.rate > min_rate) || !std::isfinite(c.rate)) {
            std::ostringstream os;
            os << side << " jump rates must exceed " << min_rate;
            throw ModelError(os.str());
        }
        if (i > 0 && !(comps[i - 1].rate < c.rate)) {
            throw ModelError(std::string(side) + " jump rates must be strictly increasing");
        }
    }
}

}  // namespace

HejdModel::HejdModel(double r, double delta, double sigma, double lambda,
                     std::vector<JumpComponent> up, std::vector<JumpComponent> down)
    : r_(r), delta_(delta), sigma_(sigma), lambda_(lambda), up_(std::move(up)),
      down_(std::move(down)) {
    if (!std::isfinite(r_) || r_ < 0.0) throw ModelError("r must be finite and >= 0");
    if (!std::isfinite(delta_) || delta_ < 0.0) throw ModelError("delta must be finite and >= 0");
    if (!std::isfinite(sigma_) || !(sigma_ > 0.0)) throw ModelError("sigma must be > 0");
    if (!std::isfinite(lambda_) || lambda_ < 0.0) throw ModelError("lambda must be >= 0");
    check_components(up_, "up", 1.0);
    check_components(down_, "down", 0.0);

    if (up_.empty() && down_.empty()) {
        if (lambda_ != 0.0) throw ModelError("lambda > 0 requires a jump mixture");
    } else {
        double total = 0.0;
        for (const auto& c : up_) total += c.weight;
        for (const auto& c : down_) total += c.weight;
        if (std::abs(total - 1.0) > kMixtureSumTol) {
            std::ostringstream os;
            os.precision(17);
            os << "jump weights must sum to 1 (got " << total << ")";
            throw ModelError(os.str());
        }
    }

    // zeta = E[e^J - 1] in closed form.
    double zeta = 0.0;
    for (const auto& c : up_) zeta += c.weight / (c.rate - 1.0);
    for (const auto& c : down_) zeta -= c.weight / (c.rate + 1.0);
    mean_jump_ = (up_.empty() && down_.empty()) ? 0.0 : zeta;
    drift_ = r_ - delta_ - lambda_ * mean_jump_ - 0.5 * sigma_ * sigma_;
}

HejdModel HejdModel::black_scholes(double r, double delta, double sigma) {
    return HejdModel(r, delta, sigma, 0.0, {}, {});
}

HejdModel HejdModel::kou(double r, double delta, double sigma, double lambda, double p_up,
                         double xi, double eta) {
    return HejdModel(r, delta, sigma, lambda, {{p_up, xi}}, {{1.0 - p_up, eta}});
}

std::span<const JumpComponent> HejdModel::active_up() const noexcept {
    return lambda_ > 0.0 ? std::span<const JumpComponent>(up_) : std::span<const JumpComponent>();
}

std::span<const JumpComponent> HejdModel::active_down() const noexcept {
    return lambda_ > 0.0 ? std::span<const JumpComponent>(down_)
                         : std::span<const JumpComponent>();
}

std::vector<double> HejdModel::poles() const {
    std::vector<double> out;
    for (const auto& c : active_up()) out.push_back(c.rate);
    for (const auto& c : active_down()) out.push_back(-c.rate);
    return out;
}

double HejdModel::jump_density(double y) const noexcept {
    double f = 0.0;
    if (y >= 0.0) {
        for (const auto& c : up_) f += c.weight * c.rate * std::exp(-c.rate * y);
    } else {
        for (const auto& c : down_) f += c.weight * c.rate * std::exp(c.rate * y);
    }
    return f;
}

void DownOutStepSpec::validate() const {
    if (!std::isfinite(strike) || strike < 0.0) throw ModelError("strike K must be finite and >= 0");
    if (!std::isfinite(barrier) || barrier < 0.0 || barrier > strike) {
        throw ModelError("barrier must satisfy 0 <= L <= K");
    }
    if (!std::isfinite(knock_rate) || knock_rate > 0.0) throw ModelError("rho_L must be <= 0");
    if (!std::isfinite(seasoning) || seasoning < 0.0) throw ModelError("gamma_L must be >= 0");
}

double laplace_exponent(const HejdModel& model, double theta) {
    for (double pole : model.poles()) {
        if (std::abs(theta - pole) <= kPoleRelTol * std::abs(pole)) {
            std::ostringstream os;
            os.precision(17);
            os << "Laplace exponent evaluated at pole " << pole;
            throw PoleError(os.str());
        }
    }
    const double s2 = model.sigma() * model.sigma();
    double jumps = 0.0;
    if (model.lambda() > 0.0) {
        // p xi/(xi - theta) - p = p theta/(xi - theta), which is exact at 0.
        for (const auto& c : model.up()) jumps += c.weight * theta / (c.rate - theta);
        for (const auto& c : model.down()) jumps -= c.weight * theta / (c.rate + theta);
    }
    return model.drift() * theta + 0.5 * s2 * theta * theta + model.lambda() * jumps;
}

double laplace_exponent_derivative(const HejdModel& model, double theta) noexcept {
    double jumps = 0.0;
    for (const auto& c : model.active_up()) {
        const double d = c.rate - theta;
        jumps += c.weight * c.rate / (d * d);
    }
    for (const auto& c : model.active_down()) {
        const double d = c.rate + theta;
        jumps -= c.weight * c.rate / (d * d);
    }
    return model.drift() + model.sigma() * model.sigma() * theta + model.lambda() * jumps;
}

std::complex<double> levy_exponent(const HejdModel& model, double theta) {
    using namespace std::complex_literals;
    const double s2 = model.sigma() * model.sigma();
    std::complex<double> jumps = 0.0;
    if (model.lambda() > 0.0) {
        for (const auto& c : model.up()) jumps += c.weight * 1i * theta / (c.rate - 1i * theta);
        for (const auto& c : model.down()) jumps -= c.weight * 1i * theta / (c.rate + 1i * theta);
    }
    return -1i * model.drift() * theta + 0.5 * s2 * theta * theta - model.lambda() * jumps;
}

DualModelReport dual_model(const HejdModel& model) {
    // Each X down-component (q, eta) becomes a Y up-component with rate eta+1
    // and mass q*eta/(eta+1); each X up-component (p, xi) becomes a Y
    // down-component with rate xi-1 and mass p*xi/(xi-1).
    if (model.up().empty() && model.down().empty()) {
        return {HejdModel::black_scholes(model.delta(), model.r(), model.sigma()), 1.0};
    }
    std::vector<JumpComponent> up;
    std::vector<JumpComponent> down;
    double mass = 0.0;
    for (const auto& c : model.down()) {
        up.push_back({c.weight * c.rate / (c.rate + 1.0), c.rate + 1.0});
        mass += up.back().weight;
    }
    for (const auto& c : model.up()) {
        down.push_back({c.weight * c.rate / (c.rate - 1.0), c.rate - 1.0});
        mass += down.back().weight;
    }
    for (auto& c : up) c.weight /= mass;
    for (auto& c : down) c.weight /= mass;
    return {HejdModel(model.delta(), model.r(), model.sigma(), model.lambda() * mass,
                      std::move(up), std::move(down)),
            mass};
}

double generator_apply(const HejdModel& model, const std::function<double(double)>& value,
                       double x, const GeneratorConfig& cfg) {
    const double h = cfg.step;
    const double v0 = value(x);
    const double vp1 = value(x + h);
    const double vm1 = value(x - h);
    const double vp2 = value(x + 2.0 * h);
    const double vm2 = value(x - 2.0 * h);
    const double d1 = (-vp2 + 8.0 * vp1 - 8.0 * vm1 + vm2) / (12.0 * h);
    const double d2 = (-vp2 + 16.0 * vp1 - 30.0 * v0 + 16.0 * vm1 - vm2) / (12.0 * h * h);

    double result = 0.5 * model.sigma() * model.sigma() * d2 + model.drift() * d1;
    if (model.lambda() == 0.0) return result;

    using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
    constexpr unsigned kMaxDepth = 15;
    const double inf = std::numeric_limits<double>::infinity();

    // Split points on each half-line, expressed as jump sizes y.
    std::vector<double> pos{0.0};
    std::vector<double> neg{0.0};
    for (double b : cfg.breakpoints) {
        const double y = b - x;
        if (y > 0.0) pos.push_back(y);
        if (y < 0.0) neg.push_back(y);
    }
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end(), std::greater<>());
    pos.push_back(inf);
    neg.push_back(-inf);

    auto integrand = [&](double y) {
        const double f = model.jump_density(y);
        return f == 0.0 ? 0.0 : (value(x + y) - v0) * f;
    };

    double integral = 0.0;
    double error = 0.0;
    double magnitude = 0.0;
    auto integrate_piece = [&](double a, double b) {
        double err = 0.0;
        double l1 = 0.0;
        const double piece = Quad::integrate(integrand, a, b, kMaxDepth, cfg.rel_tol, &err, &l1);
        integral += piece;
        error += err;
        magnitude += l1;
    };
    for (std::size_t i = 0; i + 1 < pos.size(); ++i) integrate_piece(pos[i], pos[i + 1]);
    for (std::size_t i = 0; i + 1 < neg.size(); ++i) integrate_piece(neg[i + 1], neg[i]);

    if (!std::isfinite(integral) || error > cfg.rel_tol * magnitude + cfg.abs_tol) {
        std::ostringstream os;
        os << "jump integral did not reach tolerance (error " << error << ", L1 " << magnitude
           << ")";
        throw QuadratureError(os.str());
    }
    return result + model.lambda() * integral;
}

}  // namespace hejd
