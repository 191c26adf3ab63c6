#pragma once

#include <cmath>

namespace swelm::detail {

// Kahan-Babuska compensated accumulator. The analytic index formulas sum
// n^2 terms with heavy pairwise cancellation; plain doubles lose digits.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace swelm::detail
