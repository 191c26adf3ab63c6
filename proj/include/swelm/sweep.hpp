#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "swelm/dataset.hpp"
#include "swelm/detail/hexfloat.hpp"
#include "swelm/detail/parallel.hpp"
#include "swelm/elm.hpp"
#include "swelm/errors.hpp"
#include "swelm/ridge_selection.hpp"
#include "swelm/rng.hpp"
#include "swelm/sobol_analytic.hpp"

namespace swelm {

enum class AlphaPolicy { LCurve, GCV, Fixed };

inline std::vector<double> default_p_grid() {
  return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
}

struct SweepConfig {
  std::vector<double> p_grid = default_p_grid();  // strictly increasing, p_1 = 0
  int n = 0;                                      // hidden neurons
  AlphaPolicy alpha_policy = AlphaPolicy::LCurve;
  double fixed_alpha = 1e-3;
  std::vector<double> alpha_grid = default_alpha_grid();
  // Keep the dense (p = 0) candidate unless the best sparse candidate beats
  // it by this relative margin; 0 means pure argmin.
  double improvement_threshold = 0.0;
  SeedSpec seed;

  void validate() const {
    if (n < 1) throw ConfigError("SweepConfig: neuron count must be >= 1");
    if (p_grid.empty()) throw ConfigError("SweepConfig: empty p grid");
    if (p_grid.front() != 0.0) throw ConfigError("SweepConfig: first p value must be 0");
    for (std::size_t i = 0; i < p_grid.size(); ++i) {
      if (!(p_grid[i] >= 0.0 && p_grid[i] < 1.0)) {
        throw ConfigError("SweepConfig: p values must lie in [0, 1)");
      }
      if (i > 0 && !(p_grid[i] > p_grid[i - 1])) {
        throw ConfigError("SweepConfig: p values must be strictly increasing");
      }
    }
    if (!(improvement_threshold >= 0.0 && improvement_threshold < 1.0)) {
      throw ConfigError("SweepConfig: improvement threshold must lie in [0, 1)");
    }
    // alpha = 0 is allowed: plain least squares, valid while the design has
    // full column rank
    if (alpha_policy == AlphaPolicy::Fixed &&
        !(fixed_alpha >= 0.0 && std::isfinite(fixed_alpha))) {
      throw ConfigError("SweepConfig: fixed alpha must be finite and nonnegative");
    }
  }
};

inline std::string mask_stream_label(double p) {
  return "mask-p" + detail::shortest_double(p);
}

struct SweepCandidate {
  double p = 0.0;
  double alpha = 0.0;
  double e_surr = std::numeric_limits<double>::infinity();
  bool ok = false;
  std::string error;
  bool alpha_degenerate = false;
  bool alpha_near_endpoint = false;
  std::optional<TrainedSurrogate> surrogate;
};

struct SweepResult {
  std::vector<SweepCandidate> candidates;
  std::size_t selected_index = 0;
  double selected_p = 0.0;
  SobolReport selected_report;
  SweepConfig config;  // recorded for replay
  bool train_smaller_than_n = false;

  const SweepCandidate& selected() const { return candidates[selected_index]; }
};

// Algorithm: draw one base Gaussian layer (W0, b); for each sparsification
// value p mask W0 with a fresh Bernoulli stream, pick alpha, train, and score
// on the shared validation set; keep the candidate with the smallest relative
// surrogate error and report its analytic Sobol' indices.
inline SweepResult run_sweep(const Dataset& train, const Dataset& validation,
                             const SweepConfig& config) {
  config.validate();
  if (validation.size() == 0) throw ConfigError("run_sweep: empty validation set");
  if (train.dimension() != validation.dimension()) {
    throw ConfigError("run_sweep: train and validation dimensions differ");
  }
  const Eigen::Index d = train.dimension();
  const int n = config.n;

  SweepResult result;
  result.config = config;
  result.train_smaller_than_n = train.size() < n;

  const Eigen::MatrixXd w0 =
      sample_gaussian_matrix(n, d, config.seed.with_label("weights"));
  const Eigen::VectorXd b = sample_gaussian_matrix(n, 1, config.seed.with_label("biases"));

  const std::size_t r = config.p_grid.size();
  result.candidates.resize(r);
  detail::parallel_for(static_cast<std::int64_t>(r), [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t idx = begin; idx < end; ++idx) {
      SweepCandidate& cand = result.candidates[static_cast<std::size_t>(idx)];
      const double p = config.p_grid[static_cast<std::size_t>(idx)];
      cand.p = p;
      try {
        const std::string mask_label = mask_stream_label(p);
        Eigen::MatrixXd mask =
            sample_bernoulli_mask(n, d, p, config.seed.with_label(mask_label));
        LayerSeeds seeds{config.seed.master_seed,
                         config.seed.with_label("weights").stream_label,
                         config.seed.with_label("biases").stream_label,
                         config.seed.with_label(mask_label).stream_label};
        HiddenLayer layer(w0.cwiseProduct(mask), b, p, seeds);

        Eigen::MatrixXd h = design_matrix(layer, train.inputs());
        RidgeSvd solver(h, train.outputs());
        double alpha = config.fixed_alpha;
        if (config.alpha_policy != AlphaPolicy::Fixed) {
          AlphaPath path = compute_alpha_path(solver, config.alpha_grid);
          AlphaSelection sel = config.alpha_policy == AlphaPolicy::LCurve
                                   ? select_alpha_lcurve(path)
                                   : select_alpha_gcv(path);
          alpha = sel.alpha;
          cand.alpha_degenerate = sel.degenerate;
          cand.alpha_near_endpoint = sel.near_endpoint;
        }
        Eigen::VectorXd beta = solver.solve(alpha);
        TrainingStats stats{solver.residual_norm(alpha), solver.solution_norm(alpha),
                            train.size()};
        TrainedSurrogate surrogate(layer, std::move(beta), alpha, stats);
        cand.alpha = alpha;
        cand.e_surr = relative_error(surrogate, validation);
        cand.surrogate = std::move(surrogate);
        cand.ok = true;
      } catch (const std::exception& e) {
        cand.ok = false;
        cand.error = e.what();
      }
    }
  });

  // Argmin over successful candidates, ties to the smaller p.
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < r; ++i) {
    if (!result.candidates[i].ok) continue;
    if (!best || result.candidates[i].e_surr < result.candidates[*best].e_surr) best = i;
  }
  if (!best) throw NumericError("run_sweep: all sweep candidates failed");

  // Optional conservatism: without a notable improvement, keep standard ELM.
  if (config.improvement_threshold > 0.0 && *best != 0 && result.candidates[0].ok) {
    const double dense = result.candidates[0].e_surr;
    if (!(result.candidates[*best].e_surr < (1.0 - config.improvement_threshold) * dense)) {
      best = 0;
    }
  }

  result.selected_index = *best;
  result.selected_p = result.candidates[*best].p;
  result.selected_report = analyze(*result.candidates[*best].surrogate);
  return result;
}

// Rebuild one candidate's surrogate from the recorded seeds. The random
// parts are re-derived and checked against the stored layer; the output
// weights come from the recorded (deterministic) training.
inline TrainedSurrogate replay(const SweepResult& result, double p) {
  const SweepCandidate* found = nullptr;
  for (const SweepCandidate& cand : result.candidates) {
    if (cand.p == p) {
      found = &cand;
      break;
    }
  }
  if (!found) throw ConfigError("replay: p was not part of the sweep");
  if (!found->ok || !found->surrogate) {
    throw NumericError("replay: candidate failed during the sweep: " + found->error);
  }
  const SweepConfig& config = result.config;
  const Eigen::Index d = found->surrogate->layer().d();
  Eigen::MatrixXd w0 = sample_gaussian_matrix(config.n, d, config.seed.with_label("weights"));
  Eigen::VectorXd b = sample_gaussian_matrix(config.n, 1, config.seed.with_label("biases"));
  Eigen::MatrixXd mask =
      sample_bernoulli_mask(config.n, d, p, config.seed.with_label(mask_stream_label(p)));
  Eigen::MatrixXd w = w0.cwiseProduct(mask);
  if (w != found->surrogate->layer().weights() || b != found->surrogate->layer().biases()) {
    throw NumericError("replay: recorded seeds do not reproduce the stored layer");
  }
  HiddenLayer layer(std::move(w), std::move(b), p, found->surrogate->layer().seeds());
  return TrainedSurrogate(layer, found->surrogate->output_weights(),
                          found->surrogate->reg_alpha(), found->surrogate->training_stats());
}

}  // namespace swelm
