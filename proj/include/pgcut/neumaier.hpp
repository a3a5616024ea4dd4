#pragma once

#include <cmath>

namespace pgcut {

// Neumaier variant of Kahan compensated summation. Unlike plain Kahan it
// stays correct when an incoming term is larger than the running sum.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  // Exact for powers of two; used to keep long positive series in range.
  void rescale(double factor) {
    sum_ *= factor;
    comp_ *= factor;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Drop-in uncompensated accumulator with the same interface.
class PlainSum {
 public:
  void add(double x) { sum_ += x; }
  void rescale(double factor) { sum_ *= factor; }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
};

}  // namespace pgcut
