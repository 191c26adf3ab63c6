#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "swelm/dataset.hpp"
#include "swelm/errors.hpp"

namespace swelm {

// Stream labels used to draw a layer, kept for replay and serialization.
struct LayerSeeds {
  std::uint64_t master_seed = 0;
  std::string weights_label;
  std::string biases_label;
  std::string mask_label;  // empty for dense layers
};

// Random hidden layer with exponential activation: feature j maps x to
// exp(w_j . x + b_j). Frozen after construction; training never mutates it.
class HiddenLayer {
 public:
  HiddenLayer(Eigen::MatrixXd weights, Eigen::VectorXd biases, double sparsity_p = 0.0,
              std::optional<LayerSeeds> seeds = std::nullopt)
      : weights_(std::move(weights)),
        biases_(std::move(biases)),
        sparsity_p_(sparsity_p),
        seeds_(std::move(seeds)) {
    if (weights_.rows() != biases_.size()) {
      throw ConfigError("HiddenLayer: weight rows and bias length differ");
    }
    if (weights_.rows() < 1 || weights_.cols() < 1) {
      throw ConfigError("HiddenLayer: empty layer");
    }
    if (!(sparsity_p_ >= 0.0 && sparsity_p_ < 1.0)) {
      throw ConfigError("HiddenLayer: sparsity_p must lie in [0, 1)");
    }
    if (!weights_.allFinite() || !biases_.allFinite()) {
      throw ConfigError("HiddenLayer: non-finite weights or biases");
    }
  }

  Eigen::Index n() const { return weights_.rows(); }
  Eigen::Index d() const { return weights_.cols(); }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& biases() const { return biases_; }
  double sparsity_p() const { return sparsity_p_; }
  const char* activation() const { return "exp"; }
  const std::optional<LayerSeeds>& seeds() const { return seeds_; }

 private:
  Eigen::MatrixXd weights_;  // n x d
  Eigen::VectorXd biases_;   // n
  double sparsity_p_;
  std::optional<LayerSeeds> seeds_;
};

// H_ij = exp(w_j . x_i + b_j). Entries are strictly positive; arguments large
// enough to push an entry past 1e300 are rejected rather than silently
// producing infinities that would poison the least squares solve.
inline Eigen::MatrixXd design_matrix(const HiddenLayer& layer, const Eigen::MatrixXd& inputs) {
  if (inputs.cols() != layer.d()) {
    throw ConfigError("design_matrix: input dimension does not match layer");
  }
  Eigen::MatrixXd z = inputs * layer.weights().transpose();
  z.rowwise() += layer.biases().transpose();
  constexpr double max_arg = 690.77552789821368;  // log(1e300)
  if (!z.allFinite() || z.maxCoeff() > max_arg) {
    throw NumericError("design_matrix: activation argument overflows double range");
  }
  return z.array().exp();
}

struct TrainingStats {
  double residual_norm = 0.0;  // ||H beta - y||
  double solution_norm = 0.0;  // ||beta||
  Eigen::Index train_size = 0;
};

class TrainedSurrogate {
 public:
  TrainedSurrogate(HiddenLayer layer, Eigen::VectorXd output_weights, double reg_alpha,
                   TrainingStats stats)
      : layer_(std::move(layer)),
        beta_(std::move(output_weights)),
        alpha_(reg_alpha),
        stats_(stats) {
    if (beta_.size() != layer_.n()) {
      throw ConfigError("TrainedSurrogate: output weight length does not match layer");
    }
  }

  const HiddenLayer& layer() const { return layer_; }
  const Eigen::VectorXd& output_weights() const { return beta_; }
  double reg_alpha() const { return alpha_; }
  const TrainingStats& training_stats() const { return stats_; }

 private:
  HiddenLayer layer_;
  Eigen::VectorXd beta_;
  double alpha_;
  TrainingStats stats_;
};

// Thin-SVD ridge solver. The factorization is computed once and reused for
// every regularization value, which is what the alpha-grid selection needs.
class RidgeSvd {
 public:
  RidgeSvd(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets) {
    if (design.rows() != targets.size()) {
      throw ConfigError("RidgeSvd: design rows and target length differ");
    }
    if (!design.allFinite() || !targets.allFinite()) {
      throw NumericError("RidgeSvd: non-finite data");
    }
    m_ = design.rows();
    n_ = design.cols();
    svd_.compute(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    uty_ = svd_.matrixU().transpose() * targets;
    // ||y||^2 splits into the part reachable by the column span and the rest.
    perp_sq_ = std::max(0.0, targets.squaredNorm() - uty_.squaredNorm());
  }

  Eigen::Index rows() const { return m_; }
  Eigen::Index cols() const { return n_; }
  const Eigen::VectorXd& singular_values() const { return svd_.singularValues(); }

  bool full_column_rank() const {
    const auto& s = svd_.singularValues();
    return s.size() == std::min(m_, n_) && m_ >= n_ && s(s.size() - 1) > rank_tolerance();
  }

  // beta(alpha) = V diag(s_i / (s_i^2 + alpha)) U^T y
  Eigen::VectorXd solve(double alpha) const {
    check_alpha(alpha);
    const auto& s = svd_.singularValues();
    Eigen::VectorXd filtered(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double si = s(i);
      filtered(i) = (si > 0.0 || alpha > 0.0) ? si / (si * si + alpha) * uty_(i) : 0.0;
    }
    return svd_.matrixV() * filtered;
  }

  double residual_norm(double alpha) const {
    check_alpha(alpha);
    const auto& s = svd_.singularValues();
    double acc = perp_sq_;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double si2 = s(i) * s(i);
      const double factor = (si2 + alpha) > 0.0 ? alpha / (si2 + alpha) : 1.0;
      acc += factor * factor * uty_(i) * uty_(i);
    }
    return std::sqrt(acc);
  }

  double solution_norm(double alpha) const {
    check_alpha(alpha);
    const auto& s = svd_.singularValues();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double si = s(i);
      const double c = (si > 0.0 || alpha > 0.0) ? si / (si * si + alpha) * uty_(i) : 0.0;
      acc += c * c;
    }
    return std::sqrt(acc);
  }

  // GCV(alpha) = m ||H beta - y||^2 / (m - tr(hat matrix))^2
  double gcv_score(double alpha) const {
    check_alpha(alpha);
    const auto& s = svd_.singularValues();
    double trace = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double si2 = s(i) * s(i);
      if (si2 + alpha > 0.0) trace += si2 / (si2 + alpha);
    }
    const double r = residual_norm(alpha);
    const double denom = static_cast<double>(m_) - trace;
    return static_cast<double>(m_) * r * r / (denom * denom);
  }

 private:
  double rank_tolerance() const {
    const auto& s = svd_.singularValues();
    const double smax = s.size() > 0 ? s(0) : 0.0;
    return smax * static_cast<double>(std::max(m_, n_)) *
           std::numeric_limits<double>::epsilon();
  }

  void check_alpha(double alpha) const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
      throw ConfigError("ridge: alpha must be finite and nonnegative");
    }
    if (alpha == 0.0 && !full_column_rank()) {
      throw NumericError("ridge: alpha = 0 requires a full-column-rank design matrix");
    }
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd_;
  Eigen::VectorXd uty_;
  double perp_sq_ = 0.0;
  Eigen::Index m_ = 0;
  Eigen::Index n_ = 0;
};

// Solve min_beta 1/2 ||H beta - y||^2 + alpha/2 ||beta||^2 on the layer's
// feature expansion of the training data.
inline TrainedSurrogate ridge_train(const HiddenLayer& layer, const Dataset& data, double alpha) {
  Eigen::MatrixXd h = design_matrix(layer, data.inputs());
  RidgeSvd solver(h, data.outputs());
  Eigen::VectorXd beta = solver.solve(alpha);
  TrainingStats stats{solver.residual_norm(alpha), solver.solution_norm(alpha), data.size()};
  return TrainedSurrogate(layer, std::move(beta), alpha, stats);
}

// f_hat(x) = sum_j beta_j exp(w_j . x + b_j). Points outside the unit cube
// are evaluated as-is (extrapolation); callers can test with in_unit_cube.
inline double predict(const TrainedSurrogate& surrogate, const Eigen::VectorXd& x) {
  const HiddenLayer& layer = surrogate.layer();
  if (x.size() != layer.d()) {
    throw ConfigError("predict: input dimension does not match layer");
  }
  Eigen::ArrayXd z = (layer.weights() * x + layer.biases()).array();
  return (z.exp() * surrogate.output_weights().array()).sum();
}

inline bool in_unit_cube(const Eigen::VectorXd& x) {
  return (x.array() >= 0.0).all() && (x.array() <= 1.0).all();
}

// Validation-set relative l2 error: ||f_hat(X) - y|| / ||y||.
inline double relative_error(const TrainedSurrogate& surrogate, const Dataset& validation) {
  if (validation.size() == 0) throw ConfigError("relative_error: empty validation set");
  const double ynorm = validation.outputs().norm();
  if (ynorm == 0.0) {
    throw NumericError("relative_error: validation outputs are identically zero");
  }
  Eigen::MatrixXd h = design_matrix(surrogate.layer(), validation.inputs());
  const double rnorm = (h * surrogate.output_weights() - validation.outputs()).norm();
  return rnorm / ynorm;
}

}  // namespace swelm
