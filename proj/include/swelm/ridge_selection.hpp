#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "swelm/elm.hpp"
#include "swelm/errors.hpp"

namespace swelm {

// Residual/solution norms and GCV scores along a grid of ridge parameters.
struct AlphaPath {
  std::vector<double> alphas;          // strictly increasing, positive
  std::vector<double> residual_norms;  // nondecreasing in alpha
  std::vector<double> solution_norms;  // nonincreasing in alpha
  std::vector<double> gcv_scores;

  std::size_t size() const { return alphas.size(); }

  void validate() const {
    const std::size_t k = alphas.size();
    if (residual_norms.size() != k || solution_norms.size() != k || gcv_scores.size() != k) {
      throw ConfigError("AlphaPath: column lengths differ");
    }
    for (std::size_t i = 0; i < k; ++i) {
      if (!(alphas[i] > 0.0) || !std::isfinite(alphas[i])) {
        throw ConfigError("AlphaPath: alphas must be positive and finite");
      }
      if (i > 0 && !(alphas[i] > alphas[i - 1])) {
        throw ConfigError("AlphaPath: alphas must be strictly increasing");
      }
    }
    constexpr double slack = 1e-10;
    for (std::size_t i = 1; i < k; ++i) {
      if (residual_norms[i] < residual_norms[i - 1] * (1.0 - slack)) {
        throw NumericError("AlphaPath: residual norms not nondecreasing");
      }
      if (solution_norms[i] > solution_norms[i - 1] * (1.0 + slack)) {
        throw NumericError("AlphaPath: solution norms not nonincreasing");
      }
    }
  }
};

// Selected alpha plus diagnostics. Endpoint or degenerate selections are
// legal but usually mean the grid is mis-bracketed.
struct AlphaSelection {
  double alpha = 0.0;
  std::size_t index = 0;
  bool degenerate = false;
  bool near_endpoint = false;
};

// 25 log-spaced values in [1e-8, 10].
inline std::vector<double> default_alpha_grid() {
  std::vector<double> grid(25);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = std::pow(10.0, -8.0 + 9.0 * static_cast<double>(i) / 24.0);
  }
  return grid;
}

inline AlphaPath compute_alpha_path(const RidgeSvd& solver, const std::vector<double>& alphas) {
  if (alphas.empty()) throw ConfigError("compute_alpha_path: empty alpha grid");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0) || !std::isfinite(alphas[i])) {
      throw ConfigError("compute_alpha_path: alphas must be positive and finite");
    }
    if (i > 0 && !(alphas[i] > alphas[i - 1])) {
      throw ConfigError("compute_alpha_path: alphas must be strictly increasing");
    }
  }
  AlphaPath path;
  path.alphas = alphas;
  path.residual_norms.resize(alphas.size());
  path.solution_norms.resize(alphas.size());
  path.gcv_scores.resize(alphas.size());
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    path.residual_norms[i] = solver.residual_norm(alphas[i]);
    path.solution_norms[i] = solver.solution_norm(alphas[i]);
    path.gcv_scores[i] = solver.gcv_score(alphas[i]);
  }
  path.validate();
  return path;
}

inline AlphaPath compute_alpha_path(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                                    const std::vector<double>& alphas) {
  RidgeSvd solver(design, targets);
  return compute_alpha_path(solver, alphas);
}

namespace detail {

inline bool path_degenerate(const AlphaPath& path) {
  auto spread_small = [](const std::vector<double>& v) {
    double lo = v[0], hi = v[0];
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    const double scale = std::max(std::abs(lo), std::abs(hi));
    return hi - lo <= 1e-12 * std::max(scale, 1e-300);
  };
  return spread_small(path.residual_norms) && spread_small(path.solution_norms);
}

}  // namespace detail

// L-curve corner: the grid point maximizing the signed Menger curvature of
// (log residual, log solution) over consecutive triples. With alpha ascending
// the curve runs right-and-down, and a corner is a left turn, so the cross
// product is positive there. Ties break toward larger alpha.
inline AlphaSelection select_alpha_lcurve(const AlphaPath& path) {
  const std::size_t k = path.size();
  if (k < 3) throw ConfigError("select_alpha_lcurve: need at least 3 grid points");
  path.validate();
  if (detail::path_degenerate(path)) {
    return {path.alphas[k - 1], k - 1, true, true};
  }
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    lx[i] = std::log(std::max(path.residual_norms[i], 1e-300));
    ly[i] = std::log(std::max(path.solution_norms[i], 1e-300));
  }
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_i = k - 1;
  bool found = false;
  for (std::size_t i = 1; i + 1 < k; ++i) {
    const double ax = lx[i] - lx[i - 1], ay = ly[i] - ly[i - 1];
    const double bx = lx[i + 1] - lx[i], by = ly[i + 1] - ly[i];
    const double cx = lx[i + 1] - lx[i - 1], cy = ly[i + 1] - ly[i - 1];
    const double na = std::hypot(ax, ay), nb = std::hypot(bx, by), nc = std::hypot(cx, cy);
    if (na == 0.0 || nb == 0.0 || nc == 0.0) continue;
    const double curvature = 2.0 * (ax * by - ay * bx) / (na * nb * nc);
    if (!std::isfinite(curvature)) continue;
    if (curvature >= best) {
      best = curvature;
      best_i = i;
      found = true;
    }
  }
  if (!found) {
    return {path.alphas[k - 1], k - 1, true, true};
  }
  return {path.alphas[best_i], best_i, false, best_i <= 1 || best_i + 2 >= k};
}

// Minimal-GCV alpha; ties break toward larger alpha.
inline AlphaSelection select_alpha_gcv(const AlphaPath& path) {
  if (path.size() < 1) throw ConfigError("select_alpha_gcv: empty path");
  path.validate();
  std::size_t best_i = 0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (path.gcv_scores[i] <= path.gcv_scores[best_i]) best_i = i;
  }
  const std::size_t k = path.size();
  return {path.alphas[best_i], best_i, detail::path_degenerate(path),
          k >= 3 && (best_i == 0 || best_i + 1 == k)};
}

}  // namespace swelm
