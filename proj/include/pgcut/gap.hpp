#pragma once

#include <span>
#include <utility>

namespace pgcut {

// Dispersion weight omega(x). plain is omega = 1 (recovers the simple
// variance bound); power is omega(x) = x^a with a in [1,2];
// bernoulli_variance is omega(x) = x(1-x), which vanishes at both extremes
// and is the default for annealed assignments.
enum class OmegaKind { plain, power, bernoulli_variance };

struct OmegaSpec {
  OmegaKind kind = OmegaKind::bernoulli_variance;
  double exponent = 1.0;  // for power

  double weight(double x) const;
  double weight_deriv(double x) const;
  void validate() const;
};

// Omega = sum omega(alpha_i); mu and var are the omega-weighted mean and
// dispersion. Omega = 0 forces mu = var = 0.
struct ZeroAwareStats {
  OmegaSpec omega;
  double Omega = 0.0;
  double mu = 0.0;
  double var = 0.0;
};

ZeroAwareStats weighted_stats(std::span<const double> alphas, const OmegaSpec& omega);

struct WeightedStatsGrad {
  double dmu;
  double dvar;
};

// Analytic d(mu)/d(alpha_i) and d(var)/d(alpha_i). Throws std::domain_error
// when Omega = 0.
WeightedStatsGrad weighted_stats_grad(std::span<const double> alphas, const OmegaSpec& omega, int i);

// Two-sided integrated gap bounds (lower, upper) around the common-beta
// envelope: integrals of h(t)(1 - exp(-g(t) Var)) with
// g = (m/2)(1-t^beta)^2 for the lower bound and g/t^{2 beta} for the upper.
std::pair<double, double> amgm_gap_bounds_quadrature(double q, std::span<const double> alphas,
                                                     double beta, double tol);

// H(q-2b) - 2 H(q-b) + H(q): equals the integral of h(t)(1-t^b)^2/t^{2b};
// the certified closed-form gap kernel. Requires q > 2*beta.
double second_diff_backward(double q, double beta, double alpha_bar, int m);

// H(q) - 2 H(q+b) + H(q+2b) >= 0: finite for every q > 0, used as the
// fallback kernel when the backward difference is not integrable.
double second_diff_forward(double q, double beta, double alpha_bar, int m);

// d/d(alpha_bar) of second_diff_forward via the hypergeometric derivative.
double a_tilde(double q, double beta, double alpha_bar, int m);

enum class GapKernelKind { forward_diff, backward_diff, quadrature };

struct GapCoefficient {
  double value;
  GapKernelKind kind;
  bool certified_upper;  // true only for backward_diff with q > 2 beta (or quadrature)
};

// (m/2) * Var_omega(alphas) * kernel(q), with the kernel evaluated at the
// mean sum(alphas)/m. m is the declared coordinate count: alphas may carry
// zero padding beyond the m modeled coordinates, which leaves the penalty
// unchanged to machine precision (the padded terms contribute exact zeros;
// only summation order can differ). Uses the backward kernel when
// q > 2 beta (certified); otherwise downgrades to the forward kernel and
// clears certified_upper.
GapCoefficient zero_aware_penalty(double q, std::span<const double> alphas, double beta, int m,
                                  const OmegaSpec& omega);

// Kernel-only helper shared with the objective: evaluates the active gap
// kernel at an explicit mean and degree.
double gap_kernel(double q, double beta, double alpha_bar, int m, bool prefer_backward,
                  GapKernelKind* kind_out = nullptr);

}  // namespace pgcut
