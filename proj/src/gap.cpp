#include "pgcut/gap.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pgcut/envelope.hpp"
#include "pgcut/quadrature.hpp"
#include "pgcut/simd/kernels.hpp"

namespace pgcut {

void OmegaSpec::validate() const {
  if (kind == OmegaKind::power && !(exponent >= 1.0 && exponent <= 2.0)) {
    throw std::invalid_argument("OmegaSpec: power exponent must lie in [1,2]");
  }
}

double OmegaSpec::weight(double x) const {
  switch (kind) {
    case OmegaKind::plain:
      return 1.0;
    case OmegaKind::power:
      return exponent == 1.0 ? x : std::pow(x, exponent);
    case OmegaKind::bernoulli_variance:
      return x * (1.0 - x);
  }
  return 0.0;
}

double OmegaSpec::weight_deriv(double x) const {
  switch (kind) {
    case OmegaKind::plain:
      return 0.0;
    case OmegaKind::power:
      return exponent == 1.0 ? 1.0 : exponent * std::pow(x, exponent - 1.0);
    case OmegaKind::bernoulli_variance:
      return 1.0 - 2.0 * x;
  }
  return 0.0;
}

ZeroAwareStats weighted_stats(std::span<const double> alphas, const OmegaSpec& omega) {
  omega.validate();
  ZeroAwareStats out;
  out.omega = omega;
  const int m = static_cast<int>(alphas.size());
  std::vector<double> w(m);
  double big_omega = 0.0;
  double weighted_sum = 0.0;
  for (int i = 0; i < m; ++i) {
    w[i] = omega.weight(alphas[i]);
    big_omega += w[i];
    weighted_sum += w[i] * alphas[i];
  }
  out.Omega = big_omega;
  if (big_omega == 0.0) return out;  // mu = var = 0 by convention
  out.mu = weighted_sum / big_omega;
  out.var = simd::weighted_sq_dev(w, alphas, out.mu) / big_omega;
  return out;
}

WeightedStatsGrad weighted_stats_grad(std::span<const double> alphas, const OmegaSpec& omega,
                                      int i) {
  if (i < 0 || i >= static_cast<int>(alphas.size())) {
    throw std::invalid_argument("weighted_stats_grad: index out of range");
  }
  const ZeroAwareStats stats = weighted_stats(alphas, omega);
  if (stats.Omega == 0.0) throw std::domain_error("weighted_stats_grad: Omega is zero");
  const double wi = omega.weight(alphas[i]);
  const double wpi = omega.weight_deriv(alphas[i]);
  const double dev = alphas[i] - stats.mu;
  WeightedStatsGrad g;
  g.dmu = (wi + wpi * dev) / stats.Omega;
  // Full quotient rule; the cross terms over the other coordinates cancel
  // through the centering identity sum_r w_r (alpha_r - mu) = 0.
  g.dvar = (wpi * dev * dev + 2.0 * wi * dev - stats.var * wpi) / stats.Omega;
  return g;
}

std::pair<double, double> amgm_gap_bounds_quadrature(double q, std::span<const double> alphas,
                                                     double beta, double tol) {
  if (!(q > 0.0)) throw std::invalid_argument("amgm_gap_bounds_quadrature: q must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("amgm_gap_bounds_quadrature: beta must be positive");
  const int m = static_cast<int>(alphas.size());
  if (m == 0) return {0.0, 0.0};
  const double alpha_bar = simd::sum(alphas) / m;
  const double var = simd::sq_dev(alphas, alpha_bar) / m;
  if (var == 0.0) return {0.0, 0.0};

  // h(t) (1 - exp(-g(t) Var)) with g = (m/2)(1-t^beta)^2, optionally divided
  // by t^{2 beta} for the upper bound; the 1-e^{-x} factor keeps both
  // integrands below h(t). For q < 1 integrate in u = t^q.
  auto integrand = [&](double t, bool upper) {
    const double tb = std::pow(t, beta);
    const double base = 1.0 - alpha_bar + alpha_bar * tb;
    const double h = std::pow(t, q - 1.0) * std::pow(base, m);
    double g = 0.5 * m * (1.0 - tb) * (1.0 - tb);
    if (upper) g /= tb * tb;
    const double x = g * var;
    const double factor = x > 700.0 ? 1.0 : -std::expm1(-x);
    return h * factor;
  };
  auto integrate = [&](bool upper) {
    if (q < 1.0) {
      const double inv_q = 1.0 / q;
      return integrate_adaptive(
                 [&](double u) {
                   const double t = std::pow(u, inv_q);
                   // t^{q-1} dt = (1/q) du
                   const double tb = std::pow(t, beta);
                   const double base = 1.0 - alpha_bar + alpha_bar * tb;
                   double g = 0.5 * m * (1.0 - tb) * (1.0 - tb);
                   if (upper) g /= tb * tb;
                   const double x = g * var;
                   const double factor = x > 700.0 ? 1.0 : -std::expm1(-x);
                   return inv_q * std::pow(base, m) * factor;
                 },
                 0.0, 1.0, tol)
          .value;
    }
    return integrate_adaptive([&](double t) { return integrand(t, upper); }, 0.0, 1.0, tol).value;
  };
  return {integrate(false), integrate(true)};
}

double second_diff_backward(double q, double beta, double alpha_bar, int m) {
  if (!(q > 2.0 * beta)) {
    throw std::domain_error("second_diff_backward: requires q > 2*beta for integrability");
  }
  return h_envelope(q - 2.0 * beta, beta, alpha_bar, m) -
         2.0 * h_envelope(q - beta, beta, alpha_bar, m) + h_envelope(q, beta, alpha_bar, m);
}

double second_diff_forward(double q, double beta, double alpha_bar, int m) {
  if (!(q > 0.0)) throw std::invalid_argument("second_diff_forward: q must be positive");
  return h_envelope(q, beta, alpha_bar, m) - 2.0 * h_envelope(q + beta, beta, alpha_bar, m) +
         h_envelope(q + 2.0 * beta, beta, alpha_bar, m);
}

double a_tilde(double q, double beta, double alpha_bar, int m) {
  if (!(q > 0.0)) throw std::invalid_argument("a_tilde: q must be positive");
  if (m == 0) return 0.0;
  return h_envelope_grad(q, beta, alpha_bar, m) -
         2.0 * h_envelope_grad(q + beta, beta, alpha_bar, m) +
         h_envelope_grad(q + 2.0 * beta, beta, alpha_bar, m);
}

double gap_kernel(double q, double beta, double alpha_bar, int m, bool prefer_backward,
                  GapKernelKind* kind_out) {
  if (prefer_backward && q > 2.0 * beta) {
    if (kind_out) *kind_out = GapKernelKind::backward_diff;
    return second_diff_backward(q, beta, alpha_bar, m);
  }
  if (kind_out) *kind_out = GapKernelKind::forward_diff;
  return second_diff_forward(q, beta, alpha_bar, m);
}

GapCoefficient zero_aware_penalty(double q, std::span<const double> alphas, double beta, int m,
                                  const OmegaSpec& omega) {
  if (!(q > 0.0)) throw std::invalid_argument("zero_aware_penalty: q must be positive");
  if (m < 0) throw std::invalid_argument("zero_aware_penalty: m must be nonnegative");
  const ZeroAwareStats stats = weighted_stats(alphas, omega);
  const double alpha_bar = m > 0 ? simd::sum(alphas) / m : 0.0;
  GapKernelKind kind;
  const double kernel = gap_kernel(q, beta, alpha_bar, m, /*prefer_backward=*/true, &kind);
  GapCoefficient out;
  out.kind = kind;
  out.certified_upper = kind == GapKernelKind::backward_diff;
  out.value = 0.5 * m * stats.var * kernel;
  return out;
}

}  // namespace pgcut
