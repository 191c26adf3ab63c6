#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swelm/detail/kahan.hpp"
#include "swelm/detail/parallel.hpp"
#include "swelm/errors.hpp"
#include "swelm/rng.hpp"
#include "swelm/sobol_analytic.hpp"

namespace swelm {

// Pick-freeze Sobol' estimate: Saltelli-2010 correlation form for the
// first-order indices, Jansen form for the totals, bootstrap standard errors.
struct PickFreezeEstimate {
  Eigen::VectorXd first_order;
  Eigen::VectorXd total;
  Eigen::VectorXd first_order_std_error;
  Eigen::VectorXd total_std_error;
  Eigen::Index n_base = 0;            // N
  Eigen::Index evaluations_used = 0;  // N * (d + 2)
};

namespace detail {

struct PickFreezeTable {
  Eigen::VectorXd ya, yb;  // N
  Eigen::MatrixXd yab;     // N x d, column k evaluated at A with column k from B
  double mean = 0.0;
  double variance = 0.0;  // pooled over (ya, yb)
};

// The first-order sum is centered by the pooled mean: the expectation is
// unchanged, but otherwise the estimator variance scales with mean(f)^2,
// which cripples it on QoIs with a large offset.
inline void pick_freeze_statistics(const PickFreezeTable& t, Eigen::VectorXd& first_order,
                                   Eigen::VectorXd& total) {
  const Eigen::Index n = t.ya.size();
  const Eigen::Index d = t.yab.cols();
  first_order.resize(d);
  total.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    KahanSum fo, tot;
    for (Eigen::Index i = 0; i < n; ++i) {
      fo.add((t.yb(i) - t.mean) * (t.yab(i, k) - t.ya(i)));
      const double diff = t.ya(i) - t.yab(i, k);
      tot.add(diff * diff);
    }
    first_order(k) = fo.value() / static_cast<double>(n) / t.variance;
    total(k) = tot.value() / (2.0 * static_cast<double>(n)) / t.variance;
  }
}

}  // namespace detail

// Pick-freeze estimator: two independent N x d uniform designs A and B, plus
// the d hybrids A_B^(k) (A with column k replaced from B). The evaluation
// budget is N * (d + 2); f must be reentrant since rows are a parallel map.
template <class F>
PickFreezeEstimate estimate_sobol_mc(F&& f, int d, Eigen::Index n_base, const SeedSpec& seed,
                                     int bootstrap_resamples = 200) {
  if (n_base < 100) throw ConfigError("estimate_sobol_mc: N must be at least 100");
  if (d < 1) throw ConfigError("estimate_sobol_mc: d must be >= 1");

  const Eigen::MatrixXd a = sample_iid_uniform(n_base, d, seed.with_label("pickfreeze-A")).points;
  const Eigen::MatrixXd b = sample_iid_uniform(n_base, d, seed.with_label("pickfreeze-B")).points;

  detail::PickFreezeTable table;
  table.ya.resize(n_base);
  table.yb.resize(n_base);
  table.yab.resize(n_base, d);

  detail::parallel_for(n_base, [&](std::int64_t begin, std::int64_t end) {
    Eigen::VectorXd x(d);
    auto eval_checked = [&](const Eigen::VectorXd& point, std::int64_t row) {
      const double value = f(point);
      if (!std::isfinite(value)) {
        throw NumericError("estimate_sobol_mc: non-finite model value at sample row " +
                           std::to_string(row));
      }
      return value;
    };
    for (std::int64_t i = begin; i < end; ++i) {
      x = a.row(i).transpose();
      table.ya(i) = eval_checked(x, i);
      for (int k = 0; k < d; ++k) {
        const double kept = x(k);
        x(k) = b(i, k);
        table.yab(i, k) = eval_checked(x, i);
        x(k) = kept;
      }
      x = b.row(i).transpose();
      table.yb(i) = eval_checked(x, i);
    }
  });

  detail::KahanSum mean_acc, second_acc;
  for (Eigen::Index i = 0; i < n_base; ++i) {
    mean_acc.add(table.ya(i));
    mean_acc.add(table.yb(i));
  }
  table.mean = mean_acc.value() / (2.0 * static_cast<double>(n_base));
  for (Eigen::Index i = 0; i < n_base; ++i) {
    const double da = table.ya(i) - table.mean;
    const double db = table.yb(i) - table.mean;
    second_acc.add(da * da);
    second_acc.add(db * db);
  }
  table.variance = second_acc.value() / (2.0 * static_cast<double>(n_base) - 1.0);
  if (!(table.variance > 0.0)) {
    throw NumericError("estimate_sobol_mc: sample variance is zero (constant model?)");
  }

  PickFreezeEstimate est;
  est.n_base = n_base;
  est.evaluations_used = n_base * (d + 2);
  detail::pick_freeze_statistics(table, est.first_order, est.total);

  // Bootstrap over base rows; every derived evaluation is resampled with its
  // row so the pairing is preserved.
  const int resamples = bootstrap_resamples;
  Eigen::MatrixXd fo_replicates(resamples, d);
  Eigen::MatrixXd tot_replicates(resamples, d);
  RandomStream stream(seed.with_label("bootstrap"));
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n_base));
  for (int r = 0; r < resamples; ++r) {
    for (auto& row : rows) {
      row = static_cast<Eigen::Index>(stream.next_below(static_cast<std::uint64_t>(n_base)));
    }
    double sum = 0.0, sum_sq = 0.0;
    for (Eigen::Index i : rows) {
      sum += table.ya(i) + table.yb(i);
      sum_sq += table.ya(i) * table.ya(i) + table.yb(i) * table.yb(i);
    }
    const double count = 2.0 * static_cast<double>(n_base);
    const double mean = sum / count;
    const double variance = (sum_sq - count * mean * mean) / (count - 1.0);
    for (int k = 0; k < d; ++k) {
      double fo = 0.0, tot = 0.0;
      for (Eigen::Index i : rows) {
        fo += (table.yb(i) - mean) * (table.yab(i, k) - table.ya(i));
        const double diff = table.ya(i) - table.yab(i, k);
        tot += diff * diff;
      }
      fo_replicates(r, k) = fo / static_cast<double>(n_base) / variance;
      tot_replicates(r, k) = tot / (2.0 * static_cast<double>(n_base)) / variance;
    }
  }
  est.first_order_std_error.resize(d);
  est.total_std_error.resize(d);
  for (int k = 0; k < d; ++k) {
    const double fo_mean = fo_replicates.col(k).mean();
    const double tot_mean = tot_replicates.col(k).mean();
    est.first_order_std_error(k) = std::sqrt(
        (fo_replicates.col(k).array() - fo_mean).square().sum() / (resamples - 1.0));
    est.total_std_error(k) = std::sqrt(
        (tot_replicates.col(k).array() - tot_mean).square().sum() / (resamples - 1.0));
  }
  return est;
}

struct ComparisonRecord {
  Eigen::VectorXd first_order_diff;  // analytic - mc
  Eigen::VectorXd total_diff;
  std::vector<bool> first_order_flag;  // |diff| > 3 sigma
  std::vector<bool> total_flag;
  bool any_flag = false;
};

inline ComparisonRecord compare_reports(const SobolReport& analytic,
                                        const PickFreezeEstimate& mc) {
  const Eigen::Index d = analytic.first_order.size();
  if (mc.first_order.size() != d) throw ConfigError("compare_reports: dimension mismatch");
  ComparisonRecord rec;
  rec.first_order_diff = analytic.first_order - mc.first_order;
  rec.total_diff = analytic.total - mc.total;
  rec.first_order_flag.resize(d);
  rec.total_flag.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    rec.first_order_flag[k] =
        std::abs(rec.first_order_diff(k)) > 3.0 * mc.first_order_std_error(k);
    rec.total_flag[k] = std::abs(rec.total_diff(k)) > 3.0 * mc.total_std_error(k);
    rec.any_flag = rec.any_flag || rec.first_order_flag[k] || rec.total_flag[k];
  }
  return rec;
}

}  // namespace swelm
