#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pgcut/envelope.hpp"
#include "pgcut/gap.hpp"
#include "pgcut/graph.hpp"

namespace pgcut {

// Softmax-parameterized assignments: P = softmax(logits / temperature) row
// by row. P is kept consistent with (logits, temperature) by the setters.
struct AssignmentState {
  int n = 0;
  int k = 0;
  std::vector<double> logits;  // row-major n*k
  double temperature = 1.0;
  AssignmentMatrix P;

  static AssignmentState from_logits(int n, int k, std::vector<double> logits, double temperature);
  double logit(int i, int l) const { return logits[static_cast<std::size_t>(i) * k + l]; }
  void set_logits(std::vector<double> new_logits);
  void set_temperature(double tau);
  void refresh();
};

enum class GapKernelChoice { certified_backward, forward_heuristic, auto_select };
enum class QBinning { per_vertex, per_bin };

struct ObjectiveConfig {
  double rho = 0.0;
  // bin_count = 0 applies the default rule (distinct values when few, else
  // equal_count with d = 8); otherwise make_bins(s, bin_count, bin_strategy).
  int bin_count = 0;
  BinStrategy bin_strategy = BinStrategy::equal_count;
  OmegaSpec omega;
  GapKernelChoice gap_kernel = GapKernelChoice::auto_select;
  QBinning q_binning = QBinning::per_bin;
  double eta = 1.0;  // Young majorizer balance
};

// Everything the forward pass evaluates once per step and the backward pass
// reuses: global beta-bins over the vertex weights, per-cluster bin means
// and dispersion stats, and per (cluster, q-bin, beta-bin) envelope values,
// envelope derivatives and gap-kernel coefficients. The envelope degree is
// m_ell = max(0, n-2), matching the exact per-edge expectation.
struct EnvelopeCache {
  BinPartition bins;              // over vertex weights s
  std::vector<double> weights;    // bin weights m_j / n
  int n = 0, k = 0, m_ell = 0;
  std::vector<double> q_values;   // distinct q representatives
  std::vector<int> q_of_vertex;   // vertex -> index into q_values

  std::vector<double> means;                         // k x d bin means of P columns
  std::vector<double> omega_big, omega_mu, omega_var;  // k x d zero-aware stats
  std::vector<double> plain_var;                     // k x d unweighted bin variance
  std::vector<double> H, Hp, C, Cp;                  // k x nq x d
  std::vector<GapKernelKind> kernel_kind;            // nq x d
  std::vector<double> phi_table;                     // k x nq

  int d() const { return bins.bin_count(); }
  int nq() const { return static_cast<int>(q_values.size()); }
  std::size_t cell(int l, int qi, int j) const {
    return (static_cast<std::size_t>(l) * nq() + qi) * d() + j;
  }
  std::size_t lj(int l, int j) const { return static_cast<std::size_t>(l) * d() + j; }
};

EnvelopeCache build_envelope_cache(const Graph& g, const AssignmentMatrix& P,
                                   const ObjectiveConfig& config);

// Per-bin means of column ell and the bin weights m_j / n.
std::pair<std::vector<double>, std::vector<double>> bin_cluster_means(const AssignmentMatrix& P,
                                                                      int ell,
                                                                      const BinPartition& bins);

// Edge-aggregated source weights M_{i,ell} = sum_j W_ij P_{i,ell}(1 - P_{j,ell});
// their sum over i is the soft cut mass of cluster ell.
std::vector<double> m_weights(const Graph& g, const AssignmentMatrix& P, int ell);

// Per-cluster envelope factor at offset q, from cached bin means. Falls back
// to a fresh evaluation when q is not one of the cached representatives.
double phi(int ell, double q, const EnvelopeCache& cache);

double u_value(const Graph& g, const AssignmentMatrix& P, const ObjectiveConfig& config);
double gamma_value(const Graph& g, const AssignmentMatrix& P, const ObjectiveConfig& config);

struct ObjectiveValue {
  double J;
  double U;
  double Gamma;
};

ObjectiveValue objective_value(const Graph& g, const AssignmentState& state,
                               const ObjectiveConfig& config);
ObjectiveValue objective_value_at(const Graph& g, const AssignmentMatrix& P,
                                  const ObjectiveConfig& config);

struct BackwardResult {
  ObjectiveValue value;
  std::vector<double> grad_logits;  // n x k
  std::vector<double> grad_P;       // n x k, before the softmax chain
};

// Analytic gradient of J: product rule over the affine M weights, chain rule
// through bin means for the envelope factor (constant within a bin), the
// weighted-dispersion derivatives for the gap term, then the softmax
// Jacobian with temperature.
BackwardResult backward(const Graph& g, const AssignmentState& state,
                        const ObjectiveConfig& config);

// Convex upper bound on the gap penalty via Young's inequality:
// sum_{l,j} (m w_j / 4) C_{lj} (eta Cut_l^2 + Var_{lj}^2 / eta), with C
// evaluated at q_min = min_i s_i. Dominates the matching product form
// Cut_l * sum_j w_j (m/2) C_{lj} Var_{lj} for every eta > 0.
double young_majorizer(const Graph& g, const AssignmentMatrix& P, const ObjectiveConfig& config);

struct EnvelopeConstants {
  double L;     // Lipschitz bound on |dH/d(alpha_bar)|
  double K;     // curvature bound on d^2H/d(alpha_bar)^2
  double logd;  // bound on |d log H / d(alpha_bar)|
};

// With c = q/beta + 1: L = m/(q c), K = 2m(m-1)/(q c (c+1)),
// logd = m(c+m-1)/(c(c-1)); all zero at m = 0.
EnvelopeConstants envelope_constants(double q, double beta, int m);

struct OptParams {
  int steps = 200;
  double step_size = 0.05;
  double momentum = 0.9;
  double tau0 = 1.0;
  double tau_min = 0.05;
  std::uint64_t seed = 0;
  int batch_size = 0;  // 0 or >= n: full batch
  int log_interval = 10;
  double init_scale = 0.1;  // stddev of the seeded logit initialization
};

struct TraceRow {
  int step;
  double J, U, Gamma;
  double discrete_cut;
  double tau;
};

struct OptimizeResult {
  AssignmentState state;
  std::vector<TraceRow> trace;
  HardPartition final_partition;
  double final_discrete_cut;
};

// Momentum SGD on logits with a geometric temperature decay from tau0 to
// tau_min; rho stays constant. Deterministic for a fixed seed. A zero step
// size freezes the whole schedule (no-op run). Throws std::runtime_error if
// the objective becomes non-finite.
OptimizeResult optimize(const Graph& g, const ObjectiveConfig& config, const OptParams& params,
                        int k);

}  // namespace pgcut
