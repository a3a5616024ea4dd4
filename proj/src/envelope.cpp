#include "pgcut/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pgcut/hypergeom.hpp"
#include "pgcut/neumaier.hpp"
#include "pgcut/simd/kernels.hpp"

namespace pgcut {

int BinPartition::total() const {
  return std::accumulate(sizes.begin(), sizes.end(), 0);
}

void BinPartition::validate_for(std::span<const double> betas) const {
  if (betas.size() != membership.size()) {
    throw std::invalid_argument("BinPartition: membership length mismatch");
  }
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const int j = membership[i];
    if (j < 0 || j >= bin_count()) throw std::invalid_argument("BinPartition: bad bin id");
    if (representatives[j] > betas[i]) {
      throw std::invalid_argument("BinPartition: representative exceeds member beta");
    }
  }
}

namespace {

BinPartition finalize_bins(std::span<const double> betas, std::vector<int> membership,
                           int bin_count, std::vector<double> edges) {
  // Drop empty bins, compute sizes and in-bin-minimum representatives.
  std::vector<int> sizes(bin_count, 0);
  std::vector<double> mins(bin_count, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const int j = membership[i];
    ++sizes[j];
    mins[j] = std::min(mins[j], betas[i]);
  }
  std::vector<int> remap(bin_count, -1);
  BinPartition out;
  for (int j = 0; j < bin_count; ++j) {
    if (sizes[j] == 0) continue;
    remap[j] = out.bin_count();
    out.sizes.push_back(sizes[j]);
    out.representatives.push_back(mins[j]);
  }
  out.membership.resize(betas.size());
  for (std::size_t i = 0; i < betas.size(); ++i) out.membership[i] = remap[membership[i]];
  if (!edges.empty()) {
    out.edges = std::move(edges);
  } else {
    // Synthesize boundaries from representatives and in-bin maxima.
    std::vector<double> maxs(out.bin_count(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < betas.size(); ++i) {
      maxs[out.membership[i]] = std::max(maxs[out.membership[i]], betas[i]);
    }
    out.edges.push_back(out.representatives.front());
    for (int j = 0; j < out.bin_count(); ++j) out.edges.push_back(maxs[j]);
  }
  return out;
}

}  // namespace

BinPartition make_bins(std::span<const double> betas, int d, BinStrategy strategy) {
  if (betas.empty()) throw std::invalid_argument("make_bins: betas must be nonempty");
  if (d < 1) throw std::invalid_argument("make_bins: d must be >= 1");
  for (double b : betas) {
    if (!(b > 0.0)) throw std::invalid_argument("make_bins: betas must be positive");
  }
  const int m = static_cast<int>(betas.size());
  std::vector<int> membership(m, 0);

  switch (strategy) {
    case BinStrategy::equal_width: {
      const double lo = *std::min_element(betas.begin(), betas.end());
      const double hi = *std::max_element(betas.begin(), betas.end());
      std::vector<double> edges(d + 1);
      for (int j = 0; j <= d; ++j) edges[j] = lo + (hi - lo) * j / d;
      for (int i = 0; i < m; ++i) {
        int j = hi > lo ? static_cast<int>((betas[i] - lo) / (hi - lo) * d) : 0;
        j = std::clamp(j, 0, d - 1);
        membership[i] = j;
      }
      return finalize_bins(betas, std::move(membership), d, std::move(edges));
    }
    case BinStrategy::equal_count: {
      std::vector<int> order(m);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return betas[a] != betas[b] ? betas[a] < betas[b] : a < b;
      });
      const int dd = std::min(d, m);
      for (int r = 0; r < m; ++r) {
        membership[order[r]] = static_cast<int>((static_cast<long>(r) * dd) / m);
      }
      return finalize_bins(betas, std::move(membership), dd, {});
    }
    case BinStrategy::distinct_values: {
      std::map<double, int> ids;
      for (double b : betas) ids.emplace(b, 0);
      int next = 0;
      for (auto& [value, id] : ids) id = next++;
      if (d > next) {
        throw std::invalid_argument("make_bins: d exceeds the number of distinct beta values (" +
                                    std::to_string(next) + ")");
      }
      for (int i = 0; i < m; ++i) membership[i] = ids[betas[i]];
      return finalize_bins(betas, std::move(membership), next, {});
    }
  }
  throw std::invalid_argument("make_bins: unknown strategy");
}

BinPartition make_default_bins(std::span<const double> betas) {
  std::map<double, int> distinct;
  for (double b : betas) distinct.emplace(b, 0);
  if (static_cast<int>(distinct.size()) <= 32) {
    return make_bins(betas, static_cast<int>(distinct.size()), BinStrategy::distinct_values);
  }
  return make_bins(betas, 8, BinStrategy::equal_count);
}

std::vector<double> bin_means(const BinPartition& partition, std::span<const double> alphas) {
  if (alphas.size() != partition.membership.size()) {
    throw std::invalid_argument("bin_means: alphas length mismatch");
  }
  std::vector<double> sums(partition.bin_count(), 0.0);
  for (std::size_t i = 0; i < alphas.size(); ++i) sums[partition.membership[i]] += alphas[i];
  for (int j = 0; j < partition.bin_count(); ++j) sums[j] /= partition.sizes[j];
  return sums;
}

void populate_bin_means(BinPartition& partition, std::span<const double> alphas) {
  partition.means = bin_means(partition, alphas);
}

double h_envelope(double q, double beta, double alpha_bar, int m) {
  if (!(q > 0.0)) throw std::invalid_argument("h_envelope: q must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("h_envelope: beta must be positive");
  const double c = q / beta + 1.0;
  return f21_neg_int({m, 1.0, c, alpha_bar}).value / q;
}

double h_envelope_grad(double q, double beta, double alpha_bar, int m) {
  if (!(q > 0.0)) throw std::invalid_argument("h_envelope_grad: q must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("h_envelope_grad: beta must be positive");
  if (m == 0) return 0.0;
  const double c = q / beta + 1.0;
  const double f2 = f21_neg_int({m - 1, 2.0, c + 1.0, alpha_bar}).value;
  return (-static_cast<double>(m) / c) * f2 / q;
}

EnvelopeValue holder_core(double q, std::span<const double> representatives,
                          std::span<const double> means, std::span<const double> weights,
                          int degree) {
  const int d = static_cast<int>(representatives.size());
  if (static_cast<int>(means.size()) != d || static_cast<int>(weights.size()) != d || d == 0) {
    throw std::invalid_argument("holder_core: inconsistent bin arrays");
  }
  EnvelopeValue out;
  out.per_bin_H.resize(d);
  out.per_bin_H_prime.resize(d);
  NeumaierSum log_sum;
  for (int j = 0; j < d; ++j) {
    const double h = h_envelope(q, representatives[j], means[j], degree);
    if (!(h > 0.0)) {
      throw std::domain_error("holder_core: nonpositive per-bin envelope (parameter misuse)");
    }
    out.per_bin_H[j] = h;
    out.per_bin_H_prime[j] = h_envelope_grad(q, representatives[j], means[j], degree);
    log_sum.add(weights[j] * std::log(h));
  }
  out.log_value = log_sum.value();
  out.value = std::exp(out.log_value);
  return out;
}

EnvelopeValue holder_bound(double q, std::span<const double> alphas,
                           std::span<const double> betas, const BinPartition& partition) {
  if (alphas.size() != betas.size()) throw std::invalid_argument("holder_bound: length mismatch");
  partition.validate_for(betas);
  for (int size : partition.sizes) {
    if (size == 0) throw std::invalid_argument("holder_bound: empty bin");
  }
  const int m = static_cast<int>(alphas.size());
  const std::vector<double> means = bin_means(partition, alphas);
  std::vector<double> weights(partition.bin_count());
  for (int j = 0; j < partition.bin_count(); ++j) {
    weights[j] = static_cast<double>(partition.sizes[j]) / m;
  }
  return holder_core(q, partition.representatives, means, weights, m);
}

double relaxed_c2_bound(double q, const BinPartition& partition, int m) {
  if (partition.means.size() != partition.representatives.size()) {
    throw std::invalid_argument("relaxed_c2_bound: partition means not populated");
  }
  std::string offending;
  for (int j = 0; j < partition.bin_count(); ++j) {
    if (q > partition.representatives[j]) {
      offending += (offending.empty() ? "" : ",") + std::to_string(j);
    }
  }
  if (!offending.empty()) {
    throw std::invalid_argument("relaxed_c2_bound: q > representative for bins {" + offending +
                                "}; the uniform-c relaxation needs c_j <= 2");
  }
  const int total = partition.total();
  NeumaierSum log_sum;
  for (int j = 0; j < partition.bin_count(); ++j) {
    const double h = f21_neg_int({m, 1.0, 2.0, partition.means[j]}).value / q;
    if (!(h > 0.0)) throw std::domain_error("relaxed_c2_bound: nonpositive factor");
    const double w = static_cast<double>(partition.sizes[j]) / total;
    log_sum.add(w * std::log(h));
  }
  return std::exp(log_sum.value());
}

double decoupled_q_bound(double q, const GPBInstance& inst, const BinPartition& partition) {
  inst.validate();
  partition.validate_for(inst.betas);
  const int m = inst.size();
  const std::vector<double> means = bin_means(partition, inst.alphas);
  NeumaierSum log_sum;
  for (int j = 0; j < partition.bin_count(); ++j) {
    const double c = 1.0 / partition.representatives[j] + 1.0;
    const double f = f21_neg_int({m, 1.0, c, means[j]}).value;
    if (!(f > 0.0)) throw std::domain_error("decoupled_q_bound: nonpositive factor");
    const double w = static_cast<double>(partition.sizes[j]) / m;
    log_sum.add(w * std::log(f));
  }
  return std::max(1.0, 1.0 / q) * std::exp(log_sum.value());
}

double prcut_baseline_bound(const Graph& g, std::span<const double> p_column) {
  if (g.weight_mode() != WeightMode::ratio) {
    throw std::invalid_argument("prcut_baseline_bound: defined for ratio mode (s = 1) only");
  }
  const int n = g.size();
  if (static_cast<int>(p_column.size()) != n) {
    throw std::invalid_argument("prcut_baseline_bound: column size mismatch");
  }
  const double p_bar = simd::sum(p_column) / n;
  if (p_bar == 0.0) throw std::domain_error("prcut_baseline_bound: expected cluster fraction is zero");
  // Ordered-pair sum, written over the undirected edge list (each edge
  // contributes its symmetric term twice).
  double acc = 0.0;
  for (const GraphEdge& e : g.edges()) {
    const double pi = p_column[e.i];
    const double pj = p_column[e.j];
    acc += 2.0 * e.w * (pi + pj - 2.0 * pi * pj);
  }
  return acc / (n * p_bar);
}

std::optional<double> prcut_reciprocal_bound(const GPBInstance& inst) {
  inst.validate();
  if (inst.q < 1.0) return std::nullopt;
  for (double b : inst.betas) {
    if (b != 1.0) return std::nullopt;
  }
  const double total = simd::sum(inst.alphas);
  if (total == 0.0) return std::nullopt;
  return 1.0 / total;
}

}  // namespace pgcut
