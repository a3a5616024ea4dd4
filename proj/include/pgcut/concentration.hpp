#pragma once

#include <cstdint>
#include <vector>

namespace pgcut {

// Fixed population of success probabilities with a minibatch of size n drawn
// with replacement; the plug-in estimator evaluates the envelope at the
// sampled mean.
struct ConcentrationParams {
  double q;
  double beta;
  int m;                       // population size, must equal alphas.size()
  std::vector<double> alphas;  // the population
  int n;                       // minibatch size
  double delta;                // failure probability in (0,1)

  void validate() const;
  double alpha_mean() const;
  double sigma_sq() const;  // population variance
};

// H_beta(q; sampled mean, m) for one seeded minibatch.
double minibatch_envelope(const ConcentrationParams& params, std::uint64_t seed);

// L sqrt(log(2/delta)/(2n)) + (K/2) sigma^2 / n with the c = q/beta
// convention: L = m/(q(c+1)), K = 2m(m-1)/(q c (c+1)). This L equals the
// envelope-module Lipschitz constant m/(q(q/beta+1)); this K is the looser
// curvature bound, still valid for the bias term.
double deviation_bound(const ConcentrationParams& params);

struct BiasCheckResult {
  double empirical_bias;  // mean of the estimator minus H(alpha_mean)
  double bound;           // (K/2) sigma^2 / n
  double tolerance;       // 4 * sample std / sqrt(trials)
};

// Requires trials >= 1000. Convexity keeps the bias nonnegative up to noise;
// it must fall inside [-tolerance, bound + tolerance].
BiasCheckResult bias_check(const ConcentrationParams& params, int trials, std::uint64_t seed);

struct CoverageResult {
  double bound;
  double exceed_rate;     // fraction of trials with |H~ - H(mean)| > bound
  double empirical_bias;
};

// Trial t uses the substream (seed, t), so parallel and serial runs agree.
CoverageResult run_coverage(const ConcentrationParams& params, int trials, std::uint64_t seed);

}  // namespace pgcut
