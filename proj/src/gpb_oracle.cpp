#include "pgcut/gpb_oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "pgcut/quadrature.hpp"
#include "pgcut/rng.hpp"
#include "pgcut/simd/kernels.hpp"

namespace pgcut {

void GPBInstance::validate() const {
  if (!(q > 0.0)) throw std::invalid_argument("GPBInstance: q must be positive");
  if (alphas.size() != betas.size()) {
    throw std::invalid_argument("GPBInstance: alphas and betas must have equal length");
  }
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("GPBInstance: alphas must lie in [0,1]");
  }
  for (double b : betas) {
    if (!(b > 0.0)) throw std::invalid_argument("GPBInstance: betas must be positive");
  }
}

double pgf(const GPBInstance& inst, double t) {
  inst.validate();
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("pgf: t must lie in [0,1]");
  const int m = inst.size();
  std::vector<double> u(m);
  for (int i = 0; i < m; ++i) u[i] = std::pow(t, inst.betas[i]);
  return simd::product_affine(inst.alphas, u);
}

namespace {

// Depth-first enumeration keeps products exact to one rounding per level and
// skips zero-probability branches, so alpha = 0 coordinates are bit-exact
// no-ops.
double enumerate(const GPBInstance& inst, int i, double prob, double x) {
  if (prob == 0.0) return 0.0;
  if (i == inst.size()) return prob / (inst.q + x);
  const double a = inst.alphas[i];
  double acc = 0.0;
  if (a < 1.0) acc += enumerate(inst, i + 1, prob * (1.0 - a), x);
  if (a > 0.0) acc += enumerate(inst, i + 1, prob * a, x + inst.betas[i]);
  return acc;
}

}  // namespace

OracleResult expected_reciprocal_exact(const GPBInstance& inst) {
  inst.validate();
  if (inst.size() > kExactEnumLimit) {
    throw std::length_error("expected_reciprocal_exact: enumeration limited to m <= 24");
  }
  return {enumerate(inst, 0, 1.0, 0.0), OracleMethod::exact, std::nullopt};
}

OracleResult expected_reciprocal_quadrature(const GPBInstance& inst, double tol) {
  inst.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("expected_reciprocal_quadrature: tol must be positive");
  const int m = inst.size();
  const double q = inst.q;
  QuadResult res{};
  if (q < 1.0) {
    // u = t^q; integrand becomes (1/q) * pgf(u^{1/q}), bounded at both ends.
    const double inv_q = 1.0 / q;
    res = integrate_adaptive(
        [&](double u) {
          const double t = std::pow(u, inv_q);
          double prod = 1.0;
          for (int i = 0; i < m; ++i) {
            const double ui = std::pow(t, inst.betas[i]);
            prod *= 1.0 - inst.alphas[i] + inst.alphas[i] * ui;
          }
          return inv_q * prod;
        },
        0.0, 1.0, tol);
  } else {
    res = integrate_adaptive(
        [&](double t) {
          double prod = std::pow(t, q - 1.0);
          for (int i = 0; i < m; ++i) {
            const double ui = std::pow(t, inst.betas[i]);
            prod *= 1.0 - inst.alphas[i] + inst.alphas[i] * ui;
          }
          return prod;
        },
        0.0, 1.0, tol);
  }
  return {res.value, OracleMethod::quadrature, std::nullopt};
}

OracleResult expected_reciprocal_mc(const GPBInstance& inst, long n_samples, std::uint64_t seed) {
  inst.validate();
  if (n_samples < 1) throw std::invalid_argument("expected_reciprocal_mc: n_samples must be >= 1");
  const int m = inst.size();
  // Welford accumulation: degenerate samples yield the exact value with
  // zero variance, and the running mean stays well conditioned.
  double mean = 0.0;
  double m2 = 0.0;
  for (long s = 0; s < n_samples; ++s) {
    SplitMix64 rng = substream(seed, static_cast<std::uint64_t>(s));
    double x = 0.0;
    for (int i = 0; i < m; ++i) {
      if (rng.next_unit() < inst.alphas[i]) x += inst.betas[i];
    }
    const double v = 1.0 / (inst.q + x);
    const double delta = v - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (v - mean);
  }
  double stderr_est = 0.0;
  if (n_samples > 1) {
    const double var = std::max(0.0, m2 / static_cast<double>(n_samples - 1));
    stderr_est = std::sqrt(var / static_cast<double>(n_samples));
  }
  return {mean, OracleMethod::monte_carlo, stderr_est};
}

}  // namespace pgcut
