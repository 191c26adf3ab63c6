#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "swelm/errors.hpp"

namespace swelm {

// A (master_seed, stream_label) pair names one reproducible random stream.
// Distinct labels under the same master seed give independent streams, so
// every consumer (weights, biases, per-p masks, designs...) can be drawn in
// any order, or in parallel, without perturbing the others.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::string stream_label;

  SeedSpec with_label(std::string_view label) const {
    if (stream_label.empty()) return {master_seed, std::string(label)};
    return {master_seed, stream_label + "/" + std::string(label)};
  }
};

namespace detail {

inline constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// splitmix64 stream keyed by (master_seed, stream_label). The label is
// hashed into the starting state, so streams are independent of the order
// in which they are created or consumed.
class RandomStream {
 public:
  explicit RandomStream(const SeedSpec& seed)
      : state_(detail::mix64(seed.master_seed + detail::golden_gamma) ^
               detail::mix64(detail::fnv1a64(seed.stream_label))) {}

  std::uint64_t next_u64() {
    state_ += detail::golden_gamma;
    return detail::mix64(state_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), unbiased via rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (-bound) % bound;
    for (;;) {
      std::uint64_t x = next_u64();
      if (x >= threshold) return x % bound;
    }
  }

  // Standard normal via Box-Muller; second value of each pair is cached.
  double next_gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    // u1 in (0, 1] keeps the log finite.
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

enum class DesignScheme { LatinHypercube, IidUniform };

// Experimental design on [0,1]^d. For LatinHypercube every column has exactly
// one point in each of the m equal-width strata.
struct Design {
  Eigen::MatrixXd points;  // m x d
  DesignScheme scheme = DesignScheme::LatinHypercube;
};

// rows x cols matrix of iid standard normal draws, filled row-major.
inline Eigen::MatrixXd sample_gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                                              const SeedSpec& seed) {
  if (rows < 1 || cols < 1) throw ConfigError("sample_gaussian_matrix: sizes must be >= 1");
  RandomStream stream(seed);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      out(i, j) = stream.next_gaussian();
    }
  }
  return out;
}

// Latin hypercube design: per column, a random permutation of strata with
// uniform placement inside each stratum. Column permutations independent.
inline Design sample_lhs(Eigen::Index m, Eigen::Index d, const SeedSpec& seed) {
  if (m < 1 || d < 1) throw ConfigError("sample_lhs: sizes must be >= 1");
  RandomStream stream(seed);
  Design design;
  design.points.resize(m, d);
  design.scheme = DesignScheme::LatinHypercube;
  std::vector<std::uint64_t> perm(static_cast<std::size_t>(m));
  const double inv_m = 1.0 / static_cast<double>(m);
  for (Eigen::Index col = 0; col < d; ++col) {
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::swap(perm[i - 1], perm[static_cast<std::size_t>(stream.next_below(i))]);
    }
    for (Eigen::Index row = 0; row < m; ++row) {
      const double stratum = static_cast<double>(perm[static_cast<std::size_t>(row)]);
      double v = (stratum + stream.next_double()) * inv_m;
      // Guard the upper stratum boundary against round-up.
      const double hi = (stratum + 1.0) * inv_m;
      if (v >= hi) v = std::nextafter(hi, 0.0);
      design.points(row, col) = v;
    }
  }
  return design;
}

inline Design sample_iid_uniform(Eigen::Index m, Eigen::Index d, const SeedSpec& seed) {
  if (m < 1 || d < 1) throw ConfigError("sample_iid_uniform: sizes must be >= 1");
  RandomStream stream(seed);
  Design design;
  design.points.resize(m, d);
  design.scheme = DesignScheme::IidUniform;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      design.points(i, j) = stream.next_double();
    }
  }
  return design;
}

// Bernoulli sparsity mask: entries are 0 with probability p, 1 otherwise.
inline Eigen::MatrixXd sample_bernoulli_mask(Eigen::Index rows, Eigen::Index cols, double p,
                                             const SeedSpec& seed) {
  if (rows < 1 || cols < 1) throw ConfigError("sample_bernoulli_mask: sizes must be >= 1");
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError("sample_bernoulli_mask: p must lie in [0, 1)");
  }
  RandomStream stream(seed);
  Eigen::MatrixXd mask(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      mask(i, j) = stream.next_double() < p ? 0.0 : 1.0;
    }
  }
  return mask;
}

}  // namespace swelm
