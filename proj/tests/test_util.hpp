#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pgcut/rng.hpp"

namespace pgcut::testutil {

inline bool close_rel(double a, double b, double tol) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0) return true;
  return std::abs(a - b) <= tol * scale;
}

inline bool close_abs(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline double rel_err(double a, double b, double floor = 0.0) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline std::vector<double> random_unit_vector(SplitMix64& rng, int len) {
  std::vector<double> out(len);
  for (double& v : out) v = rng.next_unit();
  return out;
}

// Five-point-free central difference with step h.
template <class F>
double central_diff(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace pgcut::testutil
