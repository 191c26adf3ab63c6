#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "swelm/errors.hpp"

namespace swelm {

struct OdeOptions {
  double rtol = 1e-6;
  double atol = 1e-9;
  double initial_step = 1e-4;
  double min_step_fraction = 1e-14;  // of the integration span
  int max_newton_iterations = 10;
  std::int64_t max_steps = 50'000'000;
};

// TR-BDF2: one-step, L-stable, second order, with a third-order embedded
// error estimate (Hosea-Shampine coefficients). Both implicit stages share
// the iteration matrix I - d*h*J, so each step factors one small LU.
//
// System requirements:
//   int size() const;
//   void rhs(const Eigen::VectorXd& y, Eigen::VectorXd& dy) const;
//   void jacobian(const Eigen::VectorXd& y, Eigen::MatrixXd& jac) const;
template <class System, class Observer>
void integrate_trbdf2(const System& system, Eigen::VectorXd y, double t_start,
                      std::span<const double> output_times, const OdeOptions& opts,
                      Observer&& observe) {
  constexpr double gamma = 0.58578643762690495;   // 2 - sqrt(2)
  constexpr double dcoef = 0.29289321881345248;   // gamma / 2, both stages
  constexpr double bdf_c1 = 1.0 / (gamma * (2.0 - gamma));
  constexpr double bdf_c2 = (1.0 - gamma) * (1.0 - gamma) / (gamma * (2.0 - gamma));
  // embedded error weights b - b_hat
  constexpr double e1 = 0.13807118835756474;   // (sqrt(2) - 1) / 3
  constexpr double e2 = -1.0 / 3.0;
  constexpr double e3 = 0.19526214587563509;   // (2 - sqrt(2)) / 3

  const int dim = system.size();
  if (output_times.empty()) return;
  const double t_end = output_times.back();
  const double span = t_end - t_start;
  if (span < 0.0) throw ConfigError("integrate_trbdf2: output times precede start");

  Eigen::VectorXd f0(dim), fg(dim), f1(dim), stage(dim), y1(dim), rhs_buf(dim), delta(dim),
      base(dim);
  Eigen::MatrixXd jac(dim, dim), iter_matrix(dim, dim);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;

  double t = t_start;
  std::size_t next_output = 0;
  while (next_output < output_times.size() && output_times[next_output] <= t) {
    observe(output_times[next_output], y);
    ++next_output;
  }
  if (next_output == output_times.size()) return;

  system.rhs(y, f0);
  double h = std::min(opts.initial_step, t_end - t);
  const double h_min = std::max(span, 1e-30) * opts.min_step_fraction;
  std::int64_t steps = 0;

  auto scaled_rms = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& ya,
                        const Eigen::VectorXd& yb) {
    double acc = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double scale = opts.atol + opts.rtol * std::max(std::abs(ya(i)), std::abs(yb(i)));
      const double r = v(i) / scale;
      acc += r * r;
    }
    return std::sqrt(acc / dim);
  };

  // Newton on G(z) = z - base - dcoef * h * f(z); returns false on stall.
  auto newton_solve = [&](Eigen::VectorXd& z) {
    for (int it = 0; it < opts.max_newton_iterations; ++it) {
      system.rhs(z, rhs_buf);
      delta = lu.solve(base + (dcoef * h) * rhs_buf - z);
      z += delta;
      if (!z.allFinite()) return false;
      if (scaled_rms(delta, z, z) <= 0.03) return true;
    }
    return false;
  };

  while (next_output < output_times.size()) {
    const double t_target = output_times[next_output];
    if (++steps > opts.max_steps) {
      throw NumericError("integrate_trbdf2: step budget exhausted at t = " + std::to_string(t));
    }
    if (h < h_min) {
      throw NumericError("integrate_trbdf2: step underflow at t = " + std::to_string(t) +
                         ", h = " + std::to_string(h));
    }
    const double remaining = t_target - t;
    bool hits_target = false;
    if (h >= remaining * (1.0 - 1e-12)) {
      h = remaining;
      hits_target = true;
    }

    system.jacobian(y, jac);
    iter_matrix = Eigen::MatrixXd::Identity(dim, dim) - (dcoef * h) * jac;
    lu.compute(iter_matrix);

    // TR stage to t + gamma h
    base = y + (dcoef * h) * f0;
    stage = y + (gamma * h) * f0;
    if (!newton_solve(stage)) {
      h *= 0.25;
      continue;
    }
    system.rhs(stage, fg);

    // BDF2 stage to t + h
    base = bdf_c1 * stage - bdf_c2 * y;
    y1 = base;
    if (!newton_solve(y1)) {
      h *= 0.25;
      continue;
    }
    system.rhs(y1, f1);

    // stiffly damped error estimate
    rhs_buf = h * (e1 * f0 + e2 * fg + e3 * f1);
    delta = lu.solve(rhs_buf);
    const double err = scaled_rms(delta, y, y1);

    if (err <= 1.0) {
      y.swap(y1);
      f0.swap(f1);
      if (hits_target) {
        t = t_target;
        observe(t_target, y);
        ++next_output;
        while (next_output < output_times.size() && output_times[next_output] <= t) {
          observe(output_times[next_output], y);
          ++next_output;
        }
      } else {
        t += h;
      }
    }
    const double factor = 0.9 * std::pow(std::max(err, 1e-10), -1.0 / 3.0);
    h *= std::clamp(factor, 0.2, 5.0);
  }
}

}  // namespace swelm
