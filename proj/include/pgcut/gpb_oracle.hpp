#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace pgcut {

// A weighted sum of independent Bernoulli variables: x = sum_i beta_i r_i
// with r_i ~ Bernoulli(alpha_i). The quantity of interest everywhere is the
// reciprocal expectation E[1/(q + x)].
struct GPBInstance {
  double q;                   // offset, > 0
  std::vector<double> alphas; // success probabilities in [0,1]
  std::vector<double> betas;  // positive weights

  int size() const { return static_cast<int>(alphas.size()); }
  void validate() const;  // throws std::invalid_argument
};

enum class OracleMethod { exact, quadrature, monte_carlo };

struct OracleResult {
  double value;
  OracleMethod method;
  std::optional<double> std_error;  // Monte Carlo only
};

inline constexpr int kExactEnumLimit = 24;

// Probability generating function E[t^x] = prod_i (1 - alpha_i + alpha_i t^{beta_i}).
// Throws std::domain_error for t outside [0,1].
double pgf(const GPBInstance& inst, double t);

// Exact 2^m enumeration over Bernoulli outcomes; the ground truth every
// bound is tested against. Throws std::length_error beyond m = 24.
OracleResult expected_reciprocal_exact(const GPBInstance& inst);

// Adaptive quadrature of int_0^1 t^{q-1} pgf(t) dt to absolute tolerance.
// For q < 1 the substitution u = t^q removes the endpoint singularity.
OracleResult expected_reciprocal_quadrature(const GPBInstance& inst, double tol);

// Seeded Monte Carlo mean of 1/(q + x) with its standard error. Sample s
// draws from the SplitMix64 substream (seed, s), so results are
// deterministic for a fixed seed regardless of evaluation order.
OracleResult expected_reciprocal_mc(const GPBInstance& inst, long n_samples, std::uint64_t seed);

}  // namespace pgcut
