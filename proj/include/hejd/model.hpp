// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace hejd {

/// One exponential component of the jump-size mixture: probability weight and
/// decay rate (xi for up-jumps, eta for down-jumps).
struct JumpComponent {
    double weight = 0.0;
    double rate = 0.0;
};

/// Hyper-exponential jump-diffusion market under the pricing measure.
///
/// The log-price drift is never an input. It is derived from the martingale
/// condition so that the Laplace exponent satisfies Phi(1) = r - delta.
/// Instances are immutable once constructed.
class HejdModel {
public:
    HejdModel(double r, double delta, double sigma, double lambda,
              std::vector<JumpComponent> up, std::vector<JumpComponent> down);

    /// Pure diffusion (Black-Scholes) market.
    static HejdModel black_scholes(double r, double delta, double sigma);

    /// Kou double-exponential model: one up and one down component.
    static HejdModel kou(double r, double delta, double sigma, double lambda,
                         double p_up, double xi, double eta);

    double r() const noexcept { return r_; }
    double delta() const noexcept { return delta_; }
    double sigma() const noexcept { return sigma_; }
    double lambda() const noexcept { return lambda_; }
    std::span<const JumpComponent> up() const noexcept { return up_; }
    std::span<const JumpComponent> down() const noexcept { return down_; }

    /// Components that actually carry jump mass; empty when lambda == 0.
    std::span<const JumpComponent> active_up() const noexcept;
    std::span<const JumpComponent> active_down() const noexcept;

    /// Mean relative jump size E[e^J - 1].
    double mean_jump() const noexcept { return mean_jump_; }

    /// Log-price drift r - delta - lambda*zeta - sigma^2/2.
    double drift() const noexcept { return drift_; }

    /// Poles of the extended Laplace exponent: xi_i and -eta_j.
    std::vector<double> poles() const;

    /// Jump density f_J(y) of the mixture.
    double jump_density(double y) const noexcept;

private:
    double r_;
    double delta_;
    double sigma_;
    double lambda_;
    std::vector<JumpComponent> up_;
    std::vector<JumpComponent> down_;
    double mean_jump_ = 0.0;
    double drift_ = 0.0;
};

/// Regular geometric down-and-out step call: strike, lower barrier, knock-out
/// rate (<= 0) and the occupation time already accumulated below the barrier.
struct DownOutStepSpec {
    double strike = 0.0;
    double barrier = 0.0;
    double knock_rate = 0.0;
    double seasoning = 0.0;

    void validate() const;
};

/// Esscher dual of a model: Pi_Y(dy) = e^{-y} Pi_X(-dy), sigma_Y = sigma_X,
/// with the roles of r and delta exchanged.
struct DualModelReport {
    HejdModel model;
    /// lambda_Y / lambda_X, equal to 1 + zeta_X.
    double intensity_ratio = 1.0;
};

/// Phi_X(theta) on the extended real domain. Throws PoleError at a pole.
double laplace_exponent(const HejdModel& model, double theta);

/// Derivative Phi_X'(theta); used by the root solver's Newton polish.
double laplace_exponent_derivative(const HejdModel& model, double theta) noexcept;

/// Psi_X(theta) for real theta, with Psi_X(-i theta) = -Phi_X(theta).
std::complex<double> levy_exponent(const HejdModel& model, double theta);

DualModelReport dual_model(const HejdModel& model);

/// Controls for generator_apply.
struct GeneratorConfig {
    /// Central-difference step in log-price.
    double step = 1e-4;
    /// Relative tolerance of the adaptive jump integral.
    double rel_tol = 1e-11;
    /// Absolute floor added to the tolerance test.
    double abs_tol = 1e-13;
    /// Log-price locations where V is not smooth; the jump integral is split
    /// there.
    std::vector<double> breakpoints;
};

/// Infinitesimal generator of X applied to V (a function of log-price) at x:
/// sigma^2/2 V'' + drift V' + lambda * int (V(x+y) - V(x)) f_J(y) dy.
/// Derivatives use five-point central differences, the integral adaptive
/// Gauss-Kronrod on each half-line.
double generator_apply(const HejdModel& model, const std::function<double(double)>& value,
                       double x, const GeneratorConfig& cfg = {});

}  // namespace hejd
