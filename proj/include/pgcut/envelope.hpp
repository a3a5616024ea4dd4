#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pgcut/gpb_oracle.hpp"
#include "pgcut/graph.hpp"

namespace pgcut {

enum class BinStrategy { equal_width, equal_count, distinct_values };

// Disjoint bins over coordinate indices by beta value. Representatives are
// always in-bin minima, which keeps every closed-form bound an upper bound.
// Empty bins are dropped at construction. `means` starts empty and is filled
// by populate_bin_means for the bounds that consume per-bin alpha means.
struct BinPartition {
  std::vector<double> edges;            // bin_count()+1 increasing boundaries
  std::vector<double> representatives;  // per-bin in-bin minimum
  std::vector<int> membership;          // coordinate index -> bin id
  std::vector<int> sizes;
  std::vector<double> means;

  int bin_count() const { return static_cast<int>(sizes.size()); }
  int total() const;
  void validate_for(std::span<const double> betas) const;  // representative <= member betas
};

// distinct_values ignores d beyond checking d <= number of distinct betas.
BinPartition make_bins(std::span<const double> betas, int d, BinStrategy strategy);
// distinct_values when there are at most 32 distinct betas, else equal_count
// with d = 8.
BinPartition make_default_bins(std::span<const double> betas);
std::vector<double> bin_means(const BinPartition& partition, std::span<const double> alphas);
void populate_bin_means(BinPartition& partition, std::span<const double> alphas);

struct EnvelopeValue {
  double value;
  double log_value;
  std::vector<double> per_bin_H;        // per-bin envelope values
  std::vector<double> per_bin_H_prime;  // d/d(mean) of each per-bin envelope
};

// Common-beta envelope H_beta(q; alpha_bar, m) = (1/q) 2F1(-m,1;q/beta+1;alpha_bar).
// Upper-bounds E[1/(q+x)] for any alpha vector with that mean.
double h_envelope(double q, double beta, double alpha_bar, int m);
// dH/d(alpha_bar) = (1/q)(-m/c) 2F1(-m+1,2;c+1;alpha_bar), always <= 0.
double h_envelope_grad(double q, double beta, double alpha_bar, int m);

// Geometric mean of per-bin envelopes with exponents m_j/m, accumulated in
// the log domain. Inner degree is the full coordinate count m. Throws on
// empty bins or nonpositive per-bin values (parameter misuse).
EnvelopeValue holder_bound(double q, std::span<const double> alphas,
                           std::span<const double> betas, const BinPartition& partition);

// Uniform-c relaxation: every c_j = q/rep_j + 1 replaced by 2. Since
// 2F1(-m,1;c;z) increases in c, this upper-bounds the Holder value exactly
// when c_j <= 2, i.e. q <= every representative; throws listing offending
// bins otherwise. Uses partition.means.
double relaxed_c2_bound(double q, const BinPartition& partition, int m);

// max(1, 1/q) times the q = 1 binned envelope: the q-dependence factored out
// of the hypergeometric parameters entirely.
double decoupled_q_bound(double q, const GPBInstance& inst, const BinPartition& partition);

// Comparison baseline for ratio mode (s = 1):
// (1/(n P_bar)) sum_{ij} W_ij (P_i + P_j - 2 P_i P_j).
double prcut_baseline_bound(const Graph& g, std::span<const double> p_column);

// Instance-level reciprocal baseline 1/(sum alphas), an upper bound on
// E[1/(q+x)] when all betas are 1 and q >= 1; nullopt otherwise.
std::optional<double> prcut_reciprocal_bound(const GPBInstance& inst);

// Log-domain core shared by the binned bounds: returns sum_j w_j log(F_j/q)
// with F_j = 2F1(-degree,1;q/rep_j+1;mean_j), plus per-bin H and H'.
EnvelopeValue holder_core(double q, std::span<const double> representatives,
                          std::span<const double> means, std::span<const double> weights,
                          int degree);

}  // namespace pgcut
