#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swelm/errors.hpp"
#include "swelm/stiff_ode.hpp"

namespace swelm {

// Circadian-clock reaction network (Vilar-style genetic oscillator) in its
// deterministic reaction-rate-equation form: 9 species, 16 mass-action
// reactions, each rate parameter uncertain within +-5% of nominal.
//
// Species order: Pa, Pr, mRNA_a, mRNA_r, A, R, C, Pa-A, Pr-A.
enum OscillatorSpecies : int {
  osc_pa = 0,
  osc_pr,
  osc_mrna_a,
  osc_mrna_r,
  osc_a,
  osc_r,
  osc_c,
  osc_pa_a,
  osc_pr_a,
};

inline constexpr int oscillator_species_count = 9;
inline constexpr int oscillator_rate_count = 16;

// Rate order: alpha_A, alpha_R, beta_A, beta_R, gamma_C, gamma_A, theta_A,
// gamma_R, theta_R, delta_A, delta_R, delta_MA, delta_MR, delta_A', alpha_a,
// alpha_r.
inline Eigen::VectorXd oscillator_nominal_rates() {
  Eigen::VectorXd k(oscillator_rate_count);
  k << 50.0, 0.01, 50.0, 5.0, 20.0, 1.0, 50.0, 1.0, 1.0, 1.0, 0.2, 10.0, 0.5, 1.0, 10.0, 5000.0;
  return k;
}

// Initial state: one activator and one repressor gene copy, nothing else.
inline Eigen::VectorXd oscillator_initial_state() {
  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(oscillator_species_count);
  y0(osc_pa) = 1.0;
  y0(osc_pr) = 1.0;
  return y0;
}

// Affine map from the unit cube to rates: k_i = nominal_i * (1 - p + 2 p x_i).
inline Eigen::VectorXd oscillator_rates_from_unit(const Eigen::VectorXd& x,
                                                  double perturbation = 0.05) {
  if (x.size() != oscillator_rate_count) {
    throw ConfigError("oscillator: expected a 16-dimensional input");
  }
  Eigen::VectorXd nominal = oscillator_nominal_rates();
  Eigen::VectorXd k(oscillator_rate_count);
  for (int i = 0; i < oscillator_rate_count; ++i) {
    k(i) = nominal(i) * (1.0 - perturbation + 2.0 * perturbation * x(i));
  }
  return k;
}

// Mass-action RRE right-hand side with analytic Jacobian. Reactions are kept
// as a table of (effective rate, one or two reactant species, stoichiometry).
class OscillatorRre {
 public:
  explicit OscillatorRre(const Eigen::VectorXd& rates) {
    if (rates.size() != oscillator_rate_count) {
      throw ConfigError("OscillatorRre: expected 16 rate parameters");
    }
    const auto& k = rates;
    // reaction effective rates; the two transcription reactions from bound
    // promoters carry composite constants alpha_a*alpha_A and alpha_r*alpha_R
    add(k(0), osc_pa, -1, {{osc_mrna_a, +1}});                              // Pa -> Pa + mRNA_a
    add(k(1), osc_pr, -1, {{osc_mrna_r, +1}});                              // Pr -> Pr + mRNA_r
    add(k(2), osc_mrna_a, -1, {{osc_a, +1}});                               // mRNA_a -> mRNA_a + A
    add(k(3), osc_mrna_r, -1, {{osc_r, +1}});                               // mRNA_r -> mRNA_r + R
    add(k(4), osc_a, osc_r, {{osc_a, -1}, {osc_r, -1}, {osc_c, +1}});       // A + R -> C
    add(k(5), osc_pa, osc_a, {{osc_pa, -1}, {osc_a, -1}, {osc_pa_a, +1}});  // Pa + A -> Pa-A
    add(k(6), osc_pa_a, -1, {{osc_pa, +1}, {osc_a, +1}, {osc_pa_a, -1}});   // Pa-A -> Pa + A
    add(k(7), osc_pr, osc_a, {{osc_pr, -1}, {osc_a, -1}, {osc_pr_a, +1}});  // Pr + A -> Pr-A
    add(k(8), osc_pr_a, -1, {{osc_pr, +1}, {osc_a, +1}, {osc_pr_a, -1}});   // Pr-A -> Pr + A
    add(k(9), osc_a, -1, {{osc_a, -1}});                                    // A -> 0
    add(k(10), osc_r, -1, {{osc_r, -1}});                                   // R -> 0
    add(k(11), osc_mrna_a, -1, {{osc_mrna_a, -1}});                         // mRNA_a -> 0
    add(k(12), osc_mrna_r, -1, {{osc_mrna_r, -1}});                         // mRNA_r -> 0
    add(k(13), osc_c, -1, {{osc_c, -1}, {osc_r, +1}});                      // C -> R
    add(k(14) * k(0), osc_pa_a, -1, {{osc_mrna_a, +1}});                    // Pa-A -> Pa-A + mRNA_a
    add(k(15) * k(1), osc_pr_a, -1, {{osc_mrna_r, +1}});                    // Pr-A -> Pr-A + mRNA_r
  }

  int size() const { return oscillator_species_count; }

  void rhs(const Eigen::VectorXd& y, Eigen::VectorXd& dy) const {
    dy.setZero();
    for (const Reaction& r : reactions_) {
      double a = r.rate * y(r.s1);
      if (r.s2 >= 0) a *= y(r.s2);
      for (const auto& [species, delta] : r.stoich) dy(species) += delta * a;
    }
  }

  void jacobian(const Eigen::VectorXd& y, Eigen::MatrixXd& jac) const {
    jac.setZero();
    for (const Reaction& r : reactions_) {
      if (r.s2 < 0) {
        const double da = r.rate;
        for (const auto& [species, delta] : r.stoich) jac(species, r.s1) += delta * da;
      } else {
        const double da1 = r.rate * y(r.s2);
        const double da2 = r.rate * y(r.s1);
        for (const auto& [species, delta] : r.stoich) {
          jac(species, r.s1) += delta * da1;
          jac(species, r.s2) += delta * da2;
        }
      }
    }
  }

 private:
  struct Reaction {
    double rate;
    int s1;
    int s2;  // -1 for unimolecular propensities
    std::vector<std::pair<int, double>> stoich;
  };

  void add(double rate, int s1, int s2, std::vector<std::pair<int, double>> stoich) {
    reactions_.push_back({rate, s1, s2, std::move(stoich)});
  }

  std::vector<Reaction> reactions_;
};

struct OscillatorSpec {
  double t_horizon = 200.0;
  int qoi_grid_points = 2000;  // uniform grid for the time-average trapezoid
  double rtol = 1e-6;
  double atol = 1e-9;
  double rate_perturbation = 0.05;
};

// QoI: time-averaged repressor concentration (1/T) int_0^T R(t) dt, with the
// trapezoid rule over the solver output grid.
inline double eval_genetic_oscillator(const Eigen::VectorXd& x, const OscillatorSpec& spec) {
  if (!(spec.t_horizon > 0.0)) throw ConfigError("oscillator: horizon must be positive");
  if (spec.qoi_grid_points < 2) throw ConfigError("oscillator: need at least 2 grid points");
  OscillatorRre system(oscillator_rates_from_unit(x, spec.rate_perturbation));

  const int g = spec.qoi_grid_points;
  std::vector<double> times(g);
  for (int j = 0; j < g; ++j) {
    times[j] = spec.t_horizon * static_cast<double>(j) / static_cast<double>(g - 1);
  }

  OdeOptions opts;
  opts.rtol = spec.rtol;
  opts.atol = spec.atol;
  opts.initial_step = std::min(1e-4, spec.t_horizon / g);

  std::vector<double> repressor(g);
  int emitted = 0;
  integrate_trbdf2(system, oscillator_initial_state(), 0.0, times, opts,
                   [&](double, const Eigen::VectorXd& y) {
                     if (y.minCoeff() < -spec.atol) {
                       throw NumericError(
                           "oscillator: concentration went negative beyond -atol");
                     }
                     repressor[emitted++] = y(osc_r);
                   });
  if (emitted != g) throw NumericError("oscillator: integrator did not reach the horizon");

  const double dt = spec.t_horizon / static_cast<double>(g - 1);
  double integral = 0.0;
  for (int j = 0; j + 1 < g; ++j) integral += 0.5 * (repressor[j] + repressor[j + 1]) * dt;
  return integral / spec.t_horizon;
}

}  // namespace swelm
