#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "swelm/errors.hpp"
#include "swelm/genetic_oscillator.hpp"
#include "swelm/rng.hpp"

namespace swelm {

enum class TruthSource { ClosedForm, MonteCarloReference };

struct GroundTruth {
  Eigen::VectorXd first_order;
  Eigen::VectorXd total;
  TruthSource source = TruthSource::ClosedForm;
};

// f_delta(x) = sum_i x_i + delta * prod_j (1 + x_j); delta dials the share of
// variance carried by interactions.
inline double eval_interaction(const Eigen::VectorXd& x, double delta) {
  double sum = 0.0, prod = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sum += x(i);
    prod *= 1.0 + x(i);
  }
  return sum + delta * prod;
}

// Closed-form indices of the interaction benchmark; identical across inputs.
inline GroundTruth interaction_ground_truth(int d, double delta) {
  if (d < 1) throw ConfigError("interaction_ground_truth: d must be >= 1");
  if (delta < 0.0) throw ConfigError("interaction_ground_truth: delta must be >= 0");
  const double dd = static_cast<double>(d);
  const double p32 = std::pow(1.5, dd);
  const double p73 = std::pow(7.0 / 3.0, dd);
  const double p94 = std::pow(2.25, dd);
  const double variance = dd * delta / 9.0 * p32 + delta * delta * (p73 - p94) + dd / 12.0;
  const double closed_one = delta * delta / 27.0 * p94 + delta / 9.0 * p32 + 1.0 / 12.0;
  const double closed_rest = delta * (dd - 1.0) / 9.0 * p32 +
                             delta * delta * (27.0 / 28.0 * p73 - p94) + (dd - 1.0) / 12.0;
  GroundTruth truth;
  truth.source = TruthSource::ClosedForm;
  truth.first_order = Eigen::VectorXd::Constant(d, closed_one / variance);
  truth.total = Eigen::VectorXd::Constant(d, 1.0 - closed_rest / variance);
  return truth;
}

// Sobol' g-function: prod_i (|4 x_i - 2| + a_i) / (1 + a_i), a_i > -1.
inline double eval_gfunction(const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
  if (x.size() != a.size()) throw ConfigError("eval_gfunction: dimension mismatch");
  double prod = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (a(i) <= -1.0) throw ConfigError("eval_gfunction: a_i must exceed -1");
    prod *= (std::abs(4.0 * x(i) - 2.0) + a(i)) / (1.0 + a(i));
  }
  return prod;
}

// Standard g-function ANOVA: V_i = (1/3)/(1+a_i)^2, V = prod(1+V_i) - 1.
inline GroundTruth gfunction_ground_truth(const Eigen::VectorXd& a) {
  const Eigen::Index d = a.size();
  if (d < 1) throw ConfigError("gfunction_ground_truth: empty coefficient vector");
  Eigen::VectorXd vi(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (a(i) <= -1.0) throw ConfigError("gfunction_ground_truth: a_i must exceed -1");
    vi(i) = (1.0 / 3.0) / ((1.0 + a(i)) * (1.0 + a(i)));
  }
  double total_prod = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) total_prod *= 1.0 + vi(i);
  const double variance = total_prod - 1.0;
  GroundTruth truth;
  truth.source = TruthSource::ClosedForm;
  truth.first_order.resize(d);
  truth.total.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    truth.first_order(i) = vi(i) / variance;
    truth.total(i) = vi(i) * (total_prod / (1.0 + vi(i))) / variance;
  }
  return truth;
}

// Random orthogonal matrix: QR of a standard-normal matrix with the sign
// convention diag(R) >= 0, so the result is deterministic per seed.
inline Eigen::MatrixXd build_orthogonal(const SeedSpec& seed, int size) {
  if (size < 1) throw ConfigError("build_orthogonal: size must be >= 1");
  Eigen::MatrixXd g = sample_gaussian_matrix(size, size, seed);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(size, size);
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < size; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  const double defect =
      (q.transpose() * q - Eigen::MatrixXd::Identity(size, size)).cwiseAbs().maxCoeff();
  if (defect > 1e-12) throw NumericError("build_orthogonal: QR lost orthogonality");
  return q;
}

struct LinearOdeSpec {
  int d = 50;
  double t_final = 10.0;
  int output_component = -1;  // -1 selects the last state entry
  std::uint64_t q_seed = 0;
  std::string q_label = "orthogonal-q";
  double perturbation = 0.05;
  Eigen::VectorXd nominal_eigenvalues;  // empty -> lambda_k = 1/k
};

// x'(t) = -A x with A = Q diag(lambda) Q^T symmetric positive definite,
// x(0) = ones. Eigenvalues are uncertain within +-5% of 1/k; the QoI reads
// one component of the exact solution Q e^{-t Lambda} Q^T x0.
class LinearOdeModel {
 public:
  explicit LinearOdeModel(const LinearOdeSpec& spec)
      : LinearOdeModel(build_orthogonal({spec.q_seed, spec.q_label}, spec.d), spec) {}

  // Test hook: explicit eigenvector matrix.
  LinearOdeModel(Eigen::MatrixXd q, const LinearOdeSpec& spec)
      : q_(std::move(q)), t_final_(spec.t_final), perturbation_(spec.perturbation) {
    if (q_.rows() != spec.d || q_.cols() != spec.d) {
      throw ConfigError("LinearOdeModel: eigenvector matrix size mismatch");
    }
    const int d = spec.d;
    nominal_ = spec.nominal_eigenvalues;
    if (nominal_.size() == 0) {
      nominal_.resize(d);
      for (int k = 0; k < d; ++k) nominal_(k) = 1.0 / static_cast<double>(k + 1);
    }
    if (nominal_.size() != d) {
      throw ConfigError("LinearOdeModel: nominal eigenvalue count mismatch");
    }
    const int out = spec.output_component < 0 ? d - 1 : spec.output_component;
    if (out < 0 || out >= d) throw ConfigError("LinearOdeModel: output component out of range");
    out_row_ = q_.row(out).transpose();
    qt_x0_ = q_.transpose() * Eigen::VectorXd::Ones(d);
  }

  int dimension() const { return static_cast<int>(nominal_.size()); }
  double t_final() const { return t_final_; }
  const Eigen::MatrixXd& eigenvectors() const { return q_; }

  Eigen::VectorXd eigenvalues_from_unit(const Eigen::VectorXd& x) const {
    Eigen::VectorXd lambda(nominal_.size());
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
      lambda(k) = nominal_(k) * (1.0 + perturbation_ * (2.0 * x(k) - 1.0));
    }
    return lambda;
  }

  double eval(const Eigen::VectorXd& x) const {
    if (x.size() != nominal_.size()) throw ConfigError("LinearOdeModel: dimension mismatch");
    Eigen::VectorXd lambda = eigenvalues_from_unit(x);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
      acc += out_row_(k) * std::exp(-t_final_ * lambda(k)) * qt_x0_(k);
    }
    return acc;
  }

  // Full state at time t, for the decay invariant.
  Eigen::VectorXd solution(const Eigen::VectorXd& x, double t) const {
    Eigen::VectorXd lambda = eigenvalues_from_unit(x);
    Eigen::VectorXd modal = qt_x0_;
    for (Eigen::Index k = 0; k < lambda.size(); ++k) modal(k) *= std::exp(-t * lambda(k));
    return q_ * modal;
  }

 private:
  Eigen::MatrixXd q_;
  Eigen::VectorXd nominal_;
  Eigen::VectorXd out_row_;
  Eigen::VectorXd qt_x0_;
  double t_final_;
  double perturbation_;
};

inline double eval_linear_ode(const Eigen::VectorXd& x, const LinearOdeModel& model) {
  return model.eval(x);
}

struct InteractionSpec {
  int d = 15;
  double delta = 1e-8;
};

struct GFunctionSpec {
  Eigen::VectorXd a;
};

// A named benchmark model with its parameters; ground truth is available in
// closed form for the interaction benchmark and the g-function.
struct ModelSpec {
  std::variant<InteractionSpec, GFunctionSpec, LinearOdeSpec, OscillatorSpec> params;

  static ModelSpec interaction(int d, double delta) { return {InteractionSpec{d, delta}}; }
  static ModelSpec gfunction(Eigen::VectorXd a) { return {GFunctionSpec{std::move(a)}}; }
  static ModelSpec linear_ode(LinearOdeSpec spec = {}) { return {std::move(spec)}; }
  static ModelSpec genetic_oscillator(OscillatorSpec spec = {}) { return {std::move(spec)}; }

  int dimension() const {
    return std::visit(
        [](const auto& p) -> int {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, InteractionSpec>) {
            return p.d;
          } else if constexpr (std::is_same_v<T, GFunctionSpec>) {
            return static_cast<int>(p.a.size());
          } else if constexpr (std::is_same_v<T, LinearOdeSpec>) {
            return p.d;
          } else {
            return oscillator_rate_count;
          }
        },
        params);
  }

  const char* name() const {
    return std::visit(
        [](const auto& p) -> const char* {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, InteractionSpec>) {
            return "interaction";
          } else if constexpr (std::is_same_v<T, GFunctionSpec>) {
            return "gfunction";
          } else if constexpr (std::is_same_v<T, LinearOdeSpec>) {
            return "linear_ode";
          } else {
            return "genetic_oscillator";
          }
        },
        params);
  }

  bool has_closed_form() const {
    return std::holds_alternative<InteractionSpec>(params) ||
           std::holds_alternative<GFunctionSpec>(params);
  }

  GroundTruth ground_truth() const {
    if (const auto* p = std::get_if<InteractionSpec>(&params)) {
      return interaction_ground_truth(p->d, p->delta);
    }
    if (const auto* p = std::get_if<GFunctionSpec>(&params)) {
      return gfunction_ground_truth(p->a);
    }
    throw ConfigError(std::string("no closed-form Sobol' indices for model '") + name() + "'");
  }
};

// Thread-safe evaluator over [0,1]^d; immutable precomputations (eigenvector
// matrix, nominal rates) are shared, per-call scratch is local.
struct ModelFunction {
  int dimension = 0;
  std::function<double(const Eigen::VectorXd&)> eval;
};

inline ModelFunction model_as_function(const ModelSpec& spec) {
  ModelFunction fn;
  fn.dimension = spec.dimension();
  if (const auto* p = std::get_if<InteractionSpec>(&spec.params)) {
    const double delta = p->delta;
    if (delta < 0.0) throw ConfigError("interaction: delta must be >= 0");
    fn.eval = [delta](const Eigen::VectorXd& x) { return eval_interaction(x, delta); };
  } else if (const auto* p = std::get_if<GFunctionSpec>(&spec.params)) {
    Eigen::VectorXd a = p->a;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (a(i) <= -1.0) throw ConfigError("gfunction: a_i must exceed -1");
    }
    fn.eval = [a](const Eigen::VectorXd& x) { return eval_gfunction(x, a); };
  } else if (const auto* p = std::get_if<LinearOdeSpec>(&spec.params)) {
    auto model = std::make_shared<const LinearOdeModel>(*p);
    fn.eval = [model](const Eigen::VectorXd& x) { return model->eval(x); };
  } else {
    const OscillatorSpec osc = std::get<OscillatorSpec>(spec.params);
    fn.eval = [osc](const Eigen::VectorXd& x) { return eval_genetic_oscillator(x, osc); };
  }
  return fn;
}

}  // namespace swelm
