#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "swelm/detail/kahan.hpp"
#include "swelm/elm.hpp"
#include "swelm/errors.hpp"

namespace swelm {

// epsilon(t) = integral of e^{t x} over [0,1] = (e^t - 1)/t, continued by 1
// at t = 0. Sparsified weights feed exact zeros and near-zeros through here
// constantly, so the region |t| < 1e-4 uses the Taylor series instead of the
// quotient (expm1 keeps full relative accuracy elsewhere).
inline double epsilon(double t) {
  if (!std::isfinite(t)) throw NumericError("epsilon: non-finite argument");
  if (t == 0.0) return 1.0;
  if (std::abs(t) < 1e-4) {
    return 1.0 + t * (0.5 + t * ((1.0 / 6.0) + t * ((1.0 / 24.0) + t * (1.0 / 120.0))));
  }
  return std::expm1(t) / t;
}

struct SobolDiagnostics {
  double raw_variance = 0.0;     // pair sum before clamping
  double term_magnitude = 0.0;   // sum of |term| magnitudes, the clamping scale
  bool variance_clamped = false;
  Eigen::VectorXd first_order_numerators;  // partial variances var(f_k)
  Eigen::VectorXd complement_variances;    // var(E(f | x_l, l != k))
};

struct SobolSubsetEntry {
  std::vector<int> u;  // 0-based input indices
  double s_u = 0.0;
  double s_u_tot = 0.0;
};

struct SobolReport {
  double mean = 0.0;
  double variance = 0.0;
  Eigen::VectorXd first_order;  // S_k
  Eigen::VectorXd total;        // S_k^tot
  std::vector<SobolSubsetEntry> subset_entries;
  SobolDiagnostics diagnostics;
};

namespace detail {

// Products of per-column factors are evaluated in a canonical order sorted
// by the underlying weight values, not by column position. This makes every
// reported quantity invariant under input permutations down to the last bit
// (for weights without exact ties), which the property suite relies on.
struct PairProductWorkspace {
  std::vector<int> order;
  std::vector<double> prefix_a, suffix_a, prefix_b, suffix_b;

  void resize(int d) {
    order.resize(d);
    prefix_a.assign(d + 1, 1.0);
    suffix_a.assign(d + 1, 1.0);
    prefix_b.assign(d + 1, 1.0);
    suffix_b.assign(d + 1, 1.0);
  }
};

struct ElmMoments {
  double mean = 0.0;
  double raw_variance = 0.0;
  double term_magnitude = 0.0;
  Eigen::VectorXd vk;     // first-order numerators
  Eigen::VectorXd vcomp;  // complement variances
};

// One pass over neuron pairs evaluating the mean, the variance, and both
// per-input numerator families:
//   mean      = sum_j c_j prod_l eps(w_jl),              c_j = beta_j e^{b_j}
//   var       = sum_{j,i} c_j c_i (prod_l A_l - prod_l B_l)
//   vk[k]     = sum_{j,i} c_j c_i (A_k - B_k) prod_{l != k} B_l
//   vcomp[k]  = sum_{j,i} c_j c_i B_k (prod_{l != k} A_l - prod_{l != k} B_l)
// with A_l = eps(w_jl + w_il) and B_l = eps(w_jl) eps(w_il). The (j,i) sum is
// symmetric, so only j <= i is visited, off-diagonal terms doubled.
inline ElmMoments elm_moments(const Eigen::MatrixXd& weights, const Eigen::VectorXd& biases,
                              const Eigen::VectorXd& beta) {
  const int n = static_cast<int>(weights.rows());
  const int d = static_cast<int>(weights.cols());

  Eigen::MatrixXd eps_w(n, d);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < d; ++l) eps_w(j, l) = epsilon(weights(j, l));
  }
  Eigen::VectorXd c(n);
  for (int j = 0; j < n; ++j) c(j) = beta(j) * std::exp(biases(j));

  PairProductWorkspace ws;
  ws.resize(d);
  std::vector<double> a(d), b(d);

  KahanSum mean_acc;
  for (int j = 0; j < n; ++j) {
    if (c(j) == 0.0) continue;
    std::iota(ws.order.begin(), ws.order.end(), 0);
    std::sort(ws.order.begin(), ws.order.end(),
              [&](int x, int y) { return weights(j, x) < weights(j, y); });
    double prod = 1.0;
    for (int t = 0; t < d; ++t) prod *= eps_w(j, ws.order[t]);
    mean_acc.add(c(j) * prod);
  }

  KahanSum var_acc, mag_acc;
  std::vector<KahanSum> vk_acc(d), vcomp_acc(d);

  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      const double factor = (i == j ? 1.0 : 2.0) * c(j) * c(i);
      if (factor == 0.0) continue;
      for (int l = 0; l < d; ++l) {
        a[l] = epsilon(weights(j, l) + weights(i, l));
        b[l] = eps_w(j, l) * eps_w(i, l);
      }
      std::iota(ws.order.begin(), ws.order.end(), 0);
      std::sort(ws.order.begin(), ws.order.end(), [&](int x, int y) {
        if (weights(j, x) != weights(j, y)) return weights(j, x) < weights(j, y);
        return weights(i, x) < weights(i, y);
      });
      for (int t = 0; t < d; ++t) {
        const int l = ws.order[t];
        ws.prefix_a[t + 1] = ws.prefix_a[t] * a[l];
        ws.prefix_b[t + 1] = ws.prefix_b[t] * b[l];
      }
      for (int t = d - 1; t >= 0; --t) {
        const int l = ws.order[t];
        ws.suffix_a[t] = a[l] * ws.suffix_a[t + 1];
        ws.suffix_b[t] = b[l] * ws.suffix_b[t + 1];
      }
      const double prod_a = ws.prefix_a[d];
      const double prod_b = ws.prefix_b[d];
      var_acc.add(factor * (prod_a - prod_b));
      mag_acc.add(std::abs(factor) * (prod_a + prod_b));
      for (int t = 0; t < d; ++t) {
        const int l = ws.order[t];
        const double excl_a = ws.prefix_a[t] * ws.suffix_a[t + 1];
        const double excl_b = ws.prefix_b[t] * ws.suffix_b[t + 1];
        vk_acc[l].add(factor * (a[l] - b[l]) * excl_b);
        vcomp_acc[l].add(factor * b[l] * (excl_a - excl_b));
      }
    }
  }

  ElmMoments out;
  out.mean = mean_acc.value();
  out.raw_variance = var_acc.value();
  out.term_magnitude = mag_acc.value();
  out.vk.resize(d);
  out.vcomp.resize(d);
  for (int k = 0; k < d; ++k) {
    out.vk(k) = vk_acc[k].value();
    out.vcomp(k) = vcomp_acc[k].value();
  }
  return out;
}

// Clamp tiny negative variances caused by cancellation; anything materially
// negative means the formula was misused.
inline double settle_variance(const ElmMoments& m, bool* clamped = nullptr) {
  if (clamped) *clamped = false;
  if (m.raw_variance >= 0.0) return m.raw_variance;
  if (m.raw_variance > -1e-10 * m.term_magnitude) {
    if (clamped) *clamped = true;
    return 0.0;
  }
  throw NumericError("analytic_variance: pair sum is negative beyond cancellation tolerance");
}

}  // namespace detail

inline double analytic_mean(const TrainedSurrogate& surrogate) {
  const auto& layer = surrogate.layer();
  return detail::elm_moments(layer.weights(), layer.biases(), surrogate.output_weights()).mean;
}

inline double analytic_variance(const TrainedSurrogate& surrogate) {
  const auto& layer = surrogate.layer();
  auto m = detail::elm_moments(layer.weights(), layer.biases(), surrogate.output_weights());
  return detail::settle_variance(m);
}

inline Eigen::VectorXd first_order_indices(const TrainedSurrogate& surrogate) {
  const auto& layer = surrogate.layer();
  auto m = detail::elm_moments(layer.weights(), layer.biases(), surrogate.output_weights());
  const double variance = detail::settle_variance(m);
  if (variance <= 0.0) throw NumericError("first_order_indices: constant surrogate");
  return m.vk / variance;
}

inline Eigen::VectorXd total_indices(const TrainedSurrogate& surrogate) {
  const auto& layer = surrogate.layer();
  auto m = detail::elm_moments(layer.weights(), layer.biases(), surrogate.output_weights());
  const double variance = detail::settle_variance(m);
  if (variance <= 0.0) throw NumericError("total_indices: constant surrogate");
  Eigen::VectorXd tot(m.vcomp.size());
  for (Eigen::Index k = 0; k < tot.size(); ++k) tot(k) = 1.0 - m.vcomp(k) / variance;
  return tot;
}

// Subset indices for u, |u| <= 20:
//   S_u      variance of the ANOVA term indexed by u (interactions of exactly
//            the inputs in u), via the signed sum over subsets of u;
//   S_u^tot  1 - var(E(f | x not in u)) / var(f).
// For singletons both agree with the per-variable operations.
inline std::pair<double, double> subset_index(const TrainedSurrogate& surrogate,
                                              const std::vector<int>& u) {
  const auto& layer = surrogate.layer();
  const int d = static_cast<int>(layer.d());
  const int q = static_cast<int>(u.size());
  if (q == 0) throw ConfigError("subset_index: empty index set");
  if (q > 20) throw ConfigError("subset_index: |u| > 20 is not supported (2^|u| subset sum)");
  std::vector<bool> in_u(d, false);
  for (int k : u) {
    if (k < 0 || k >= d) throw ConfigError("subset_index: index out of range");
    if (in_u[k]) throw ConfigError("subset_index: duplicate index");
    in_u[k] = true;
  }

  const Eigen::MatrixXd& weights = layer.weights();
  const Eigen::VectorXd& biases = layer.biases();
  const Eigen::VectorXd& beta = surrogate.output_weights();
  const int n = static_cast<int>(weights.rows());

  auto moments = detail::elm_moments(weights, biases, beta);
  const double variance = detail::settle_variance(moments);
  if (variance <= 0.0) throw NumericError("subset_index: constant surrogate");

  Eigen::VectorXd c(n);
  for (int j = 0; j < n; ++j) c(j) = beta(j) * std::exp(biases(j));

  const std::size_t n_masks = std::size_t{1} << q;
  std::vector<double> mask_prod(n_masks, 1.0);
  std::vector<double> sign(n_masks);
  for (std::size_t mask = 0; mask < n_masks; ++mask) {
    const int bits = std::popcount(mask);
    sign[mask] = ((q - bits) % 2 == 0) ? 1.0 : -1.0;
  }

  std::vector<double> a(d), b(d), mixed(d), ratio(q);
  std::vector<int> order(d);
  detail::KahanSum su_acc, comp_acc;

  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      const double factor = (i == j ? 1.0 : 2.0) * c(j) * c(i);
      if (factor == 0.0) continue;
      for (int l = 0; l < d; ++l) {
        a[l] = epsilon(weights(j, l) + weights(i, l));
        b[l] = epsilon(weights(j, l)) * epsilon(weights(i, l));
        mixed[l] = in_u[l] ? b[l] : a[l];
      }
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int x, int y) {
        if (weights(j, x) != weights(j, y)) return weights(j, x) < weights(j, y);
        return weights(i, x) < weights(i, y);
      });
      double prod_b = 1.0, prod_mixed = 1.0;
      for (int t = 0; t < d; ++t) {
        prod_b *= b[order[t]];
        prod_mixed *= mixed[order[t]];
      }
      // total: var(E(f | complement of u)) accumulates prod_mixed - prod_b
      comp_acc.add(factor * (prod_mixed - prod_b));
      // term index: signed sum over w subset of u of prod with A on w
      for (int t = 0; t < q; ++t) ratio[t] = a[u[t]] / b[u[t]];
      mask_prod[0] = 1.0;
      for (std::size_t mask = 1; mask < n_masks; ++mask) {
        const int low = std::countr_zero(mask);
        mask_prod[mask] = mask_prod[mask & (mask - 1)] * ratio[low];
      }
      detail::KahanSum pair_sum;
      for (std::size_t mask = 0; mask < n_masks; ++mask) {
        pair_sum.add(sign[mask] * mask_prod[mask]);
      }
      su_acc.add(factor * prod_b * pair_sum.value());
    }
  }

  const double s_u = su_acc.value() / variance;
  const double s_u_tot = 1.0 - comp_acc.value() / variance;
  return {s_u, s_u_tot};
}

inline SobolReport analyze(const TrainedSurrogate& surrogate) {
  const auto& layer = surrogate.layer();
  auto m = detail::elm_moments(layer.weights(), layer.biases(), surrogate.output_weights());
  SobolReport report;
  report.diagnostics.raw_variance = m.raw_variance;
  report.diagnostics.term_magnitude = m.term_magnitude;
  report.diagnostics.first_order_numerators = m.vk;
  report.diagnostics.complement_variances = m.vcomp;
  report.mean = m.mean;
  report.variance = detail::settle_variance(m, &report.diagnostics.variance_clamped);
  if (report.variance <= 0.0) {
    throw NumericError("analyze: constant surrogate has no Sobol' indices");
  }
  const Eigen::Index d = m.vk.size();
  report.first_order = m.vk / report.variance;
  report.total.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    report.total(k) = 1.0 - m.vcomp(k) / report.variance;
  }
  return report;
}

}  // namespace swelm
