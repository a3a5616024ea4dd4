#include "pgcut/hypergeom.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pgcut/neumaier.hpp"

namespace pgcut {

namespace {

#ifdef PGCUT_PLAIN_SUM_SMALL_M
constexpr bool kCompensateSmallM = false;
#else
constexpr bool kCompensateSmallM = true;
#endif

void validate(const F21Params& p) {
  if (p.m < 0) throw std::invalid_argument("f21: m must be nonnegative");
  if (p.m > kF21DegreeCap) {
    throw std::invalid_argument("f21: degree m exceeds cap " + std::to_string(kF21DegreeCap));
  }
  if (!(p.b > 0.0)) throw std::invalid_argument("f21: b must be positive");
  if (!(p.c > 0.0)) throw std::invalid_argument("f21: c must be positive");
  if (!(p.z >= 0.0 && p.z <= 1.0)) throw std::invalid_argument("f21: z must lie in [0,1]");
}

// Defining alternating series via the term-ratio recurrence.
template <class Acc>
F21Eval series_direct(int m, double b, double c, double z) {
  Acc s;
  s.add(1.0);
  double t = 1.0;
  int terms = 1;
  bool early = false;
  for (int k = 1; k <= m; ++k) {
    t *= ((-static_cast<double>(m) + k - 1) * (b + k - 1)) / ((c + k - 1) * k) * z;
    if (std::abs(t) < kF21EpsRel * std::max(std::abs(s.value()), kF21DeltaAbs)) {
      early = true;
      break;
    }
    s.add(t);
    ++terms;
  }
  return {s.value(), terms, early};
}

// Pfaff-transformed series: nonnegative terms, no cancellation. The running
// sum can reach (1-z)^{-m}, so it is rescaled by powers of two and the
// (1-z)^m prefactor is folded back in log2 space when needed.
F21Eval series_pfaff(int m, double b, double c, double z) {
  const double one_minus_z = 1.0 - z;
  const double x = z / one_minus_z;
  NeumaierSum s;
  s.add(1.0);
  double t = 1.0;
  int terms = 1;
  bool early = false;
  long scale_log2 = 0;
  for (int k = 1; k <= m; ++k) {
    const double r = ((static_cast<double>(m) - k + 1) * x / k) * ((c - b + k - 1) / (c + k - 1));
    t *= r;
    if (r < 1.0 && t < kF21EpsRel * std::max(s.value(), kF21DeltaAbs) * (1.0 - r)) {
      early = true;
      break;
    }
    s.add(t);
    ++terms;
    if (t > 0x1p900) {
      s.rescale(0x1p-900);
      t *= 0x1p-900;
      scale_log2 += 900;
    }
  }
  if (scale_log2 == 0) {
    const double prefactor = std::pow(one_minus_z, m);
    if (prefactor >= std::numeric_limits<double>::min()) {
      return {prefactor * s.value(), terms, early};
    }
  }
  const double log2_value =
      m * std::log2(one_minus_z) + std::log2(s.value()) + static_cast<double>(scale_log2);
  return {std::exp2(log2_value), terms, early};
}

// Gauss summation at z = 1 (requires c > b): 2F1(-m,b;c;1) = (c-b)_m/(c)_m.
F21Eval gauss_at_one(int m, double b, double c) {
  double prod = 1.0;
  for (int j = 0; j < m; ++j) {
    prod *= (c - b + j) / (c + j);
    if (prod < 1e-290) {
      // Switch to the log-gamma form to dodge underflow.
      const double lg = std::lgamma(c) - std::lgamma(c - b) + std::lgamma(c - b + m) - std::lgamma(c + m);
      return {std::exp(lg), 1, false};
    }
  }
  return {prod, 1, false};
}

}  // namespace

F21Eval f21_neg_int(const F21Params& params) {
  validate(params);
  const int m = params.m;
  const double b = params.b;
  const double c = params.c;
  const double z = params.z;
  if (m == 0 || z == 0.0) return {1.0, 1, false};
  if (c >= b) {
    if (z == 1.0) {
      if (c > b) return gauss_at_one(m, b, c);
      return {0.0, 1, false};  // c == b: (1-z)^m at z = 1
    }
    return series_pfaff(m, b, c, z);
  }
  if (m > 32 || kCompensateSmallM) {
    return series_direct<NeumaierSum>(m, b, c, z);
  }
  return series_direct<PlainSum>(m, b, c, z);
}

double f21_derivative(const F21Params& params) {
  validate(params);
  if (params.m == 0) return 0.0;
  const F21Eval shifted = f21_neg_int({params.m - 1, params.b + 1.0, params.c + 1.0, params.z});
  return (-static_cast<double>(params.m) * params.b / params.c) * shifted.value;
}

double f21_log_derivative(int m, double c, double z) {
  if (m == 0) {
    validate({0, 1.0, c, z});
    return 0.0;
  }
  const F21Eval f1 = f21_neg_int({m, 1.0, c, z});
  if (!(f1.value > 0.0)) {
    throw std::domain_error("f21_log_derivative: 2F1(-m,1;c;z) is not positive");
  }
  const F21Eval f2 = f21_neg_int({m - 1, 2.0, c + 1.0, z});
  return -(static_cast<double>(m) / c) * f2.value / f1.value;
}

}  // namespace pgcut
