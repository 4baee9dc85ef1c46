#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>

namespace vitdd {

/// Correctly rounded summation of doubles (Shewchuk partials, msum-style).
/// The result equals the exact real sum rounded once, so it is independent of
/// the order in which terms are added. Attention aggregations use this so
/// that permuting key tokens leaves query outputs bitwise unchanged.
class ExactSum {
 public:
  void add(double x) {
    std::size_t i = 0;
    for (std::size_t j = 0; j < size_; ++j) {
      double y = partials_[j];
      if (std::fabs(x) < std::fabs(y)) {
        double t = x;
        x = y;
        y = t;
      }
      double hi = x + y;
      double lo = y - (hi - x);
      if (lo != 0.0) partials_[i++] = lo;
      x = hi;
    }
    partials_[i++] = x;
    size_ = i;
  }

  /// Rounds the partials to the nearest double, with the half-ulp correction
  /// from the msum recipe so double rounding cannot occur.
  double value() const {
    if (size_ == 0) return 0.0;
    std::size_t n = size_;
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
      double x = hi;
      double y = partials_[--n];
      hi = x + y;
      double yr = hi - x;
      lo = y - yr;
      if (lo != 0.0) break;
    }
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) ||
                  (lo > 0.0 && partials_[n - 1] > 0.0))) {
      double y = lo * 2.0;
      double x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

 private:
  // Nonoverlapping partials: at most ~40 are possible for finite doubles.
  std::array<double, 64> partials_{};
  std::size_t size_ = 0;
};

inline double exact_sum(std::span<const double> values) {
  ExactSum s;
  for (double v : values) s.add(v);
  return s.value();
}

}  // namespace vitdd
