#pragma once

#include <functional>
#include <stdexcept>

namespace pgcut {

struct ToleranceNotMetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuadResult {
  double value;
  double error_estimate;
  int evaluations;
};

// Globally adaptive Gauss-Kronrod (G7,K15) integration of f over [a,b] to
// absolute tolerance abs_tol. The worst panel is bisected until the summed
// error estimate certifies the tolerance; throws ToleranceNotMetError when
// the panel budget runs out first. Panel contributions are summed in
// interval order, so results are deterministic.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double abs_tol, int max_panels = 4096);

}  // namespace pgcut
