#pragma once

// Test-side oracle: tensor-product Gauss-Legendre quadrature ANOVA on
// [0,1]^d. Deliberately independent of the library's analytic index path;
// everything here works from pointwise function values only.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace swelm_test {

struct QuadratureRule {
  std::vector<double> nodes;    // on [0,1]
  std::vector<double> weights;  // sum to 1
};

// Gauss-Legendre nodes via Newton on P_n, mapped from [-1,1] to [0,1].
inline QuadratureRule gauss_legendre_01(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

// Full ANOVA bookkeeping for f over a tensor grid: mean, variance, closed
// (first-order) variances per input, complement variances, and closed
// variances of arbitrary subsets.
class TensorAnova {
 public:
  TensorAnova(const std::function<double(const Eigen::VectorXd&)>& f, int d, int nodes_per_axis)
      : d_(d), n_(nodes_per_axis), rule_(gauss_legendre_01(nodes_per_axis)) {
    std::size_t total = 1;
    for (int k = 0; k < d_; ++k) total *= static_cast<std::size_t>(n_);
    values_.resize(total);
    Eigen::VectorXd x(d_);
    std::vector<int> idx(d_, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
      decode(flat, idx);
      for (int k = 0; k < d_; ++k) x(k) = rule_.nodes[idx[k]];
      values_[flat] = f(x);
    }
    double mean = 0.0, second = 0.0;
    for (std::size_t flat = 0; flat < total; ++flat) {
      decode(flat, idx);
      double w = 1.0;
      for (int k = 0; k < d_; ++k) w *= rule_.weights[idx[k]];
      mean += w * values_[flat];
      second += w * values_[flat] * values_[flat];
    }
    mean_ = mean;
    variance_ = second - mean * mean;
  }

  double mean() const { return mean_; }
  double variance() const { return variance_; }

  // var(E(f | x_u)); empty u gives 0.
  double closed_variance(const std::vector<int>& u) const {
    if (u.empty()) return 0.0;
    std::size_t groups = 1;
    for (std::size_t t = 0; t < u.size(); ++t) groups *= static_cast<std::size_t>(n_);
    std::vector<double> cond(groups, 0.0);
    std::vector<bool> in_u(d_, false);
    for (int k : u) in_u[k] = true;
    std::vector<int> idx(d_, 0);
    for (std::size_t flat = 0; flat < values_.size(); ++flat) {
      decode(flat, idx);
      double w_rest = 1.0;
      std::size_t key = 0;
      for (int k = d_ - 1; k >= 0; --k) {
        if (in_u[k]) {
          key = key * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx[k]);
        } else {
          w_rest *= rule_.weights[idx[k]];
        }
      }
      cond[key] += w_rest * values_[flat];
    }
    double acc = 0.0;
    std::vector<int> kidx(u.size(), 0);
    for (std::size_t key = 0; key < groups; ++key) {
      std::size_t rem = key;
      double w = 1.0;
      for (std::size_t t = u.size(); t-- > 0;) {
        w *= rule_.weights[rem % n_];
        rem /= n_;
      }
      acc += w * cond[key] * cond[key];
    }
    return acc - mean_ * mean_;
  }

  double first_order(int k) const { return closed_variance({k}) / variance_; }

  double total(int k) const {
    std::vector<int> rest;
    for (int l = 0; l < d_; ++l) {
      if (l != k) rest.push_back(l);
    }
    return 1.0 - closed_variance(rest) / variance_;
  }

  // Variance of the ANOVA term for u: signed sum of closed variances.
  double term_variance(const std::vector<int>& u) const {
    const std::size_t q = u.size();
    double acc = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << q); ++mask) {
      std::vector<int> v;
      for (std::size_t t = 0; t < q; ++t) {
        if (mask & (std::size_t{1} << t)) v.push_back(u[t]);
      }
      const double sign = ((q - v.size()) % 2 == 0) ? 1.0 : -1.0;
      acc += sign * closed_variance(v);
    }
    return acc;
  }

 private:
  void decode(std::size_t flat, std::vector<int>& idx) const {
    for (int k = 0; k < d_; ++k) {
      idx[k] = static_cast<int>(flat % static_cast<std::size_t>(n_));
      flat /= static_cast<std::size_t>(n_);
    }
  }

  int d_;
  int n_;
  QuadratureRule rule_;
  std::vector<double> values_;
  double mean_ = 0.0;
  double variance_ = 0.0;
};

}  // namespace swelm_test
