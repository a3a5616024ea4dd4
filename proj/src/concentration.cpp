#include "pgcut/concentration.hpp"

#include <cmath>
#include <stdexcept>

#include "pgcut/envelope.hpp"
#include "pgcut/rng.hpp"
#include "pgcut/simd/kernels.hpp"

namespace pgcut {

void ConcentrationParams::validate() const {
  if (!(q > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("ConcentrationParams: q and beta must be positive");
  }
  if (m != static_cast<int>(alphas.size()) || m < 1) {
    throw std::invalid_argument("ConcentrationParams: m must equal the population size");
  }
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw std::invalid_argument("ConcentrationParams: alphas must lie in [0,1]");
    }
  }
  if (n < 1) throw std::invalid_argument("ConcentrationParams: n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("ConcentrationParams: delta must lie in (0,1)");
  }
}

double ConcentrationParams::alpha_mean() const { return simd::sum(alphas) / m; }

double ConcentrationParams::sigma_sq() const {
  return simd::sq_dev(alphas, alpha_mean()) / m;
}

double minibatch_envelope(const ConcentrationParams& params, std::uint64_t seed) {
  params.validate();
  SplitMix64 rng(seed);
  double sum = 0.0;
  for (int r = 0; r < params.n; ++r) {
    sum += params.alphas[rng.next_below(static_cast<std::uint64_t>(params.m))];
  }
  return h_envelope(params.q, params.beta, sum / params.n, params.m);
}

double deviation_bound(const ConcentrationParams& params) {
  params.validate();
  const double c = params.q / params.beta;
  const double L = params.m / (params.q * (c + 1.0));
  const double K = 2.0 * params.m * (params.m - 1.0) / (params.q * c * (c + 1.0));
  return L * std::sqrt(std::log(2.0 / params.delta) / (2.0 * params.n)) +
         0.5 * K * params.sigma_sq() / params.n;
}

BiasCheckResult bias_check(const ConcentrationParams& params, int trials, std::uint64_t seed) {
  params.validate();
  if (trials < 1000) throw std::invalid_argument("bias_check: trials must be >= 1000");
  const double reference = h_envelope(params.q, params.beta, params.alpha_mean(), params.m);
  double sum = 0.0, sum_sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    SplitMix64 rng = substream(seed, static_cast<std::uint64_t>(t));
    double batch_sum = 0.0;
    for (int r = 0; r < params.n; ++r) {
      batch_sum += params.alphas[rng.next_below(static_cast<std::uint64_t>(params.m))];
    }
    const double h = h_envelope(params.q, params.beta, batch_sum / params.n, params.m);
    sum += h;
    sum_sq += h * h;
  }
  const double mean = sum / trials;
  const double var = std::max(0.0, (sum_sq - trials * mean * mean) / (trials - 1));
  const double c = params.q / params.beta;
  const double K = 2.0 * params.m * (params.m - 1.0) / (params.q * c * (c + 1.0));
  BiasCheckResult out;
  out.empirical_bias = mean - reference;
  out.bound = 0.5 * K * params.sigma_sq() / params.n;
  out.tolerance = 4.0 * std::sqrt(var / trials);
  return out;
}

CoverageResult run_coverage(const ConcentrationParams& params, int trials, std::uint64_t seed) {
  params.validate();
  if (trials < 1) throw std::invalid_argument("run_coverage: trials must be >= 1");
  const double reference = h_envelope(params.q, params.beta, params.alpha_mean(), params.m);
  const double bound = deviation_bound(params);
  int exceed = 0;
  double sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    SplitMix64 rng = substream(seed, static_cast<std::uint64_t>(t));
    double batch_sum = 0.0;
    for (int r = 0; r < params.n; ++r) {
      batch_sum += params.alphas[rng.next_below(static_cast<std::uint64_t>(params.m))];
    }
    const double h = h_envelope(params.q, params.beta, batch_sum / params.n, params.m);
    if (std::abs(h - reference) > bound) ++exceed;
    sum += h;
  }
  return {bound, static_cast<double>(exceed) / trials, sum / trials - reference};
}

}  // namespace pgcut
