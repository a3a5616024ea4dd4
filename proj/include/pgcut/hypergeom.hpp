#pragma once

#include <limits>

namespace pgcut {

// Parameters of the degree-truncated Gauss hypergeometric polynomial
// 2F1(-m, b; c; z) restricted to z in [0,1]. The envelope family uses
// b = 1 and c = q/beta + 1 (> 1); derivative evaluations use b = 2, 3.
struct F21Params {
  int m;     // truncation degree, a = -m
  double b;  // second numerator parameter, > 0
  double c;  // denominator parameter, > 0
  double z;  // argument in [0,1]
};

struct F21Eval {
  double value;
  int terms_used;        // series terms accumulated (1 for closed-form paths)
  bool converged_early;  // true if the tail was dropped by the exit rule
};

inline constexpr double kF21EpsRel = 1e-14;
inline constexpr double kF21DeltaAbs = 16.0 * std::numeric_limits<double>::epsilon();
inline constexpr int kF21DegreeCap = 1000000;

// Evaluates 2F1(-m, b; c; z) = sum_{k=0}^{m} (-m)_k (b)_k / ((c)_k k!) z^k.
//
// The defining series alternates and cancels catastrophically once m*z is
// large (at m = 64, z = 0.5 it loses ~10 digits), so for c >= b the sum is
// routed through the Pfaff transformation
//     2F1(-m, b; c; z) = (1-z)^m 2F1(-m, c-b; c; z/(z-1)),
// whose transformed series has all-nonnegative terms and is evaluated by the
// same term-ratio recurrence with Kahan-Neumaier compensation and the
// early-exit rule |t_{k+1}| < eps_rel * max(|S_k|, delta_abs). At z = 1 the
// Gauss summation closed form (c-b)_m / (c)_m is used. The alternating
// recurrence is kept for c < b, outside the envelope family.
//
// Throws std::invalid_argument for m < 0, m > degree cap, b <= 0, c <= 0,
// or z outside [0,1].
F21Eval f21_neg_int(const F21Params& params);

// d/dz 2F1(-m, b; c; z) = (-m b / c) 2F1(-m+1, b+1; c+1; z); 0 for m = 0.
double f21_derivative(const F21Params& params);

// d/dz log 2F1(-m, 1; c; z) = -(m/c) F2(z)/F1(z) with
// F1 = 2F1(-m,1;c;z), F2 = 2F1(-m+1,2;c+1;z). Throws std::domain_error if
// F1 evaluates <= 0 (the envelope family keeps it strictly positive).
double f21_log_derivative(int m, double c, double z);

}  // namespace pgcut
