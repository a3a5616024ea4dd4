#include "pgcut/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pgcut/hypergeom.hpp"
#include "pgcut/neumaier.hpp"
#include "pgcut/rng.hpp"
#include "pgcut/simd/kernels.hpp"

namespace pgcut {

AssignmentState AssignmentState::from_logits(int n, int k, std::vector<double> logits,
                                             double temperature) {
  if (static_cast<int>(logits.size()) != n * k) {
    throw std::invalid_argument("AssignmentState: logits size mismatch");
  }
  AssignmentState s;
  s.n = n;
  s.k = k;
  s.logits = std::move(logits);
  s.temperature = temperature;
  s.refresh();
  return s;
}

void AssignmentState::set_logits(std::vector<double> new_logits) {
  if (new_logits.size() != logits.size()) {
    throw std::invalid_argument("AssignmentState: logits size mismatch");
  }
  logits = std::move(new_logits);
  refresh();
}

void AssignmentState::set_temperature(double tau) {
  temperature = tau;
  refresh();
}

void AssignmentState::refresh() {
  if (!(temperature > 0.0)) throw std::invalid_argument("AssignmentState: temperature must be positive");
  P.n = n;
  P.k = k;
  P.p.assign(static_cast<std::size_t>(n) * k, 0.0);
  for (int i = 0; i < n; ++i) {
    double row_max = logit(i, 0);
    for (int l = 1; l < k; ++l) row_max = std::max(row_max, logit(i, l));
    double denom = 0.0;
    for (int l = 0; l < k; ++l) {
      const double e = std::exp((logit(i, l) - row_max) / temperature);
      P.at(i, l) = e;
      denom += e;
    }
    for (int l = 0; l < k; ++l) P.at(i, l) /= denom;
  }
}

std::pair<std::vector<double>, std::vector<double>> bin_cluster_means(const AssignmentMatrix& P,
                                                                      int ell,
                                                                      const BinPartition& bins) {
  if (static_cast<int>(bins.membership.size()) != P.n) {
    throw std::invalid_argument("bin_cluster_means: partition size mismatch");
  }
  const int d = bins.bin_count();
  std::vector<double> means(d, 0.0);
  for (int i = 0; i < P.n; ++i) means[bins.membership[i]] += P.at(i, ell);
  std::vector<double> weights(d);
  const int total = bins.total();
  for (int j = 0; j < d; ++j) {
    means[j] /= bins.sizes[j];
    weights[j] = static_cast<double>(bins.sizes[j]) / total;
  }
  return {std::move(means), std::move(weights)};
}

std::vector<double> m_weights(const Graph& g, const AssignmentMatrix& P, int ell) {
  const int n = g.size();
  if (P.n != n) throw std::invalid_argument("m_weights: size mismatch");
  const std::vector<double> col = P.column(ell);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = std::max(0.0, col[i] * (g.degree(i) - g.row_dot(i, col)));
  }
  return out;
}

namespace {

BinPartition config_bins(const Graph& g, const ObjectiveConfig& config) {
  const std::vector<double>& s = g.vertex_weights();
  if (config.bin_count <= 0) return make_default_bins(s);
  return make_bins(s, config.bin_count, config.bin_strategy);
}

double kernel_value(double q, double beta, double mean, int m, GapKernelChoice choice,
                    GapKernelKind* kind) {
  switch (choice) {
    case GapKernelChoice::certified_backward:
      if (kind) *kind = GapKernelKind::backward_diff;
      return second_diff_backward(q, beta, mean, m);  // throws when q <= 2 beta
    case GapKernelChoice::forward_heuristic:
      if (kind) *kind = GapKernelKind::forward_diff;
      return second_diff_forward(q, beta, mean, m);
    case GapKernelChoice::auto_select:
      return gap_kernel(q, beta, mean, m, /*prefer_backward=*/true, kind);
  }
  throw std::invalid_argument("unknown gap kernel choice");
}

double kernel_mean_derivative(double q, double beta, double mean, int m, GapKernelKind kind) {
  if (kind == GapKernelKind::backward_diff) {
    return h_envelope_grad(q - 2.0 * beta, beta, mean, m) -
           2.0 * h_envelope_grad(q - beta, beta, mean, m) + h_envelope_grad(q, beta, mean, m);
  }
  return a_tilde(q, beta, mean, m);
}

}  // namespace

EnvelopeCache build_envelope_cache(const Graph& g, const AssignmentMatrix& P,
                                   const ObjectiveConfig& config) {
  config.omega.validate();
  const int n = g.size();
  if (P.n != n) throw std::invalid_argument("build_envelope_cache: size mismatch");
  EnvelopeCache cache;
  cache.n = n;
  cache.k = P.k;
  cache.m_ell = std::max(0, n - 2);
  cache.bins = config_bins(g, config);
  const int d = cache.bins.bin_count();
  cache.weights.resize(d);
  for (int j = 0; j < d; ++j) {
    cache.weights[j] = static_cast<double>(cache.bins.sizes[j]) / cache.bins.total();
  }

  // q representatives: per_bin collapses each vertex weight to its bin's
  // in-bin minimum, preserving the upper-bound direction; per_vertex keeps
  // the distinct s values.
  cache.q_of_vertex.resize(n);
  if (config.q_binning == QBinning::per_bin) {
    cache.q_values = cache.bins.representatives;
    for (int i = 0; i < n; ++i) cache.q_of_vertex[i] = cache.bins.membership[i];
  } else {
    std::vector<double> sorted(g.vertex_weights());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    cache.q_values = sorted;
    for (int i = 0; i < n; ++i) {
      cache.q_of_vertex[i] = static_cast<int>(
          std::lower_bound(sorted.begin(), sorted.end(), g.vertex_weight(i)) - sorted.begin());
    }
  }
  const int nq = cache.nq();
  const int k = cache.k;
  const int m = cache.m_ell;

  cache.means.resize(static_cast<std::size_t>(k) * d);
  cache.omega_big.resize(static_cast<std::size_t>(k) * d);
  cache.omega_mu.resize(static_cast<std::size_t>(k) * d);
  cache.omega_var.resize(static_cast<std::size_t>(k) * d);
  cache.plain_var.resize(static_cast<std::size_t>(k) * d);
  cache.H.resize(static_cast<std::size_t>(k) * nq * d);
  cache.Hp.resize(static_cast<std::size_t>(k) * nq * d);
  cache.C.resize(static_cast<std::size_t>(k) * nq * d);
  cache.Cp.resize(static_cast<std::size_t>(k) * nq * d);
  cache.kernel_kind.resize(static_cast<std::size_t>(nq) * d);
  cache.phi_table.resize(static_cast<std::size_t>(k) * nq);

  // Per-bin member lists, used for the dispersion statistics.
  std::vector<std::vector<int>> members(d);
  for (int i = 0; i < n; ++i) members[cache.bins.membership[i]].push_back(i);

  std::vector<double> probs, w;
  for (int l = 0; l < k; ++l) {
    for (int j = 0; j < d; ++j) {
      probs.clear();
      w.clear();
      double sum = 0.0;
      for (int i : members[j]) {
        const double p = P.at(i, l);
        probs.push_back(p);
        w.push_back(config.omega.weight(p));
        sum += p;
      }
      const double mean = sum / members[j].size();
      cache.means[cache.lj(l, j)] = mean;
      const double big = simd::sum(w);
      cache.omega_big[cache.lj(l, j)] = big;
      double mu = 0.0, var = 0.0;
      if (big > 0.0) {
        mu = simd::dot(w, probs) / big;
        var = simd::weighted_sq_dev(w, probs, mu) / big;
      }
      cache.omega_mu[cache.lj(l, j)] = mu;
      cache.omega_var[cache.lj(l, j)] = var;
      cache.plain_var[cache.lj(l, j)] = simd::sq_dev(probs, mean) / members[j].size();
    }
    for (int qi = 0; qi < nq; ++qi) {
      const double q = cache.q_values[qi];
      NeumaierSum log_phi;
      for (int j = 0; j < d; ++j) {
        const double beta = cache.bins.representatives[j];
        const double mean = cache.means[cache.lj(l, j)];
        const double c = q / beta + 1.0;
        const std::size_t idx = cache.cell(l, qi, j);
        const double f1 = f21_neg_int({m, 1.0, c, mean}).value;
        if (!(f1 > 0.0)) throw std::domain_error("build_envelope_cache: nonpositive envelope");
        cache.H[idx] = f1 / q;
        cache.Hp[idx] = m > 0
                            ? (-static_cast<double>(m) / c) *
                                  f21_neg_int({m - 1, 2.0, c + 1.0, mean}).value / q
                            : 0.0;
        GapKernelKind kind;
        cache.C[idx] = kernel_value(q, beta, mean, m, config.gap_kernel, &kind);
        cache.kernel_kind[static_cast<std::size_t>(qi) * d + j] = kind;
        cache.Cp[idx] = kernel_mean_derivative(q, beta, mean, m, kind);
        log_phi.add(cache.weights[j] * std::log(cache.H[idx]));
      }
      cache.phi_table[static_cast<std::size_t>(l) * nq + qi] = std::exp(log_phi.value());
    }
  }
  return cache;
}

double phi(int ell, double q, const EnvelopeCache& cache) {
  if (ell < 0 || ell >= cache.k) throw std::invalid_argument("phi: cluster index out of range");
  for (int qi = 0; qi < cache.nq(); ++qi) {
    if (cache.q_values[qi] == q) {
      return cache.phi_table[static_cast<std::size_t>(ell) * cache.nq() + qi];
    }
  }
  std::vector<double> means(cache.d());
  for (int j = 0; j < cache.d(); ++j) means[j] = cache.means[cache.lj(ell, j)];
  return holder_core(q, cache.bins.representatives, means, cache.weights, cache.m_ell).value;
}

namespace {

struct Evaluation {
  ObjectiveValue value;
  std::vector<double> grad_P;
};

Evaluation evaluate(const Graph& g, const AssignmentMatrix& P, const ObjectiveConfig& config,
                    bool want_grad) {
  const int n = g.size();
  const int k = P.k;
  const EnvelopeCache cache = build_envelope_cache(g, P, config);
  const int d = cache.d();
  const int nq = cache.nq();
  const int m = cache.m_ell;
  const double half_m = 0.5 * m;

  Evaluation out;
  out.value = {0.0, 0.0, 0.0};
  if (want_grad) out.grad_P.assign(static_cast<std::size_t>(n) * k, 0.0);

  std::vector<double> col(n), mvec(n), rowremain(n), fvec(n), pf(n);
  std::vector<double> gap_at_q(nq), a_by_q(nq);

  for (int l = 0; l < k; ++l) {
    for (int i = 0; i < n; ++i) col[i] = P.at(i, l);
    for (int i = 0; i < n; ++i) {
      rowremain[i] = g.degree(i) - g.row_dot(i, col);
      mvec[i] = col[i] * rowremain[i];
    }

    // G_l(q) = sum_j w_j (m/2) Var^omega_lj C_lj(q)
    for (int qi = 0; qi < nq; ++qi) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) {
        acc += cache.weights[j] * half_m * cache.omega_var[cache.lj(l, j)] *
               cache.C[cache.cell(l, qi, j)];
      }
      gap_at_q[qi] = acc;
    }

    NeumaierSum u_sum, gamma_sum;
    for (int i = 0; i < n; ++i) {
      const int qi = cache.q_of_vertex[i];
      u_sum.add(mvec[i] * cache.phi_table[static_cast<std::size_t>(l) * nq + qi]);
      gamma_sum.add(mvec[i] * gap_at_q[qi]);
    }
    out.value.U += u_sum.value();
    out.value.Gamma += gamma_sum.value();

    if (!want_grad) continue;

    // Aggregate M by q representative once; every chain-rule term below is a
    // weighted sum over these totals.
    std::fill(a_by_q.begin(), a_by_q.end(), 0.0);
    for (int i = 0; i < n; ++i) a_by_q[cache.q_of_vertex[i]] += mvec[i];

    for (int i = 0; i < n; ++i) {
      const int qi = cache.q_of_vertex[i];
      fvec[i] = cache.phi_table[static_cast<std::size_t>(l) * nq + qi] +
                config.rho * gap_at_q[qi];
      pf[i] = col[i] * fvec[i];
    }

    // Phi chain: S_j = sum_i M_i Phi(q_i) Hp/H (q_i, j); Gamma chain:
    // CA_j = sum_i M_i C(q_i, j), CpA_j likewise for the kernel derivative.
    std::vector<double> s_phi(d, 0.0), ca(d, 0.0), cpa(d, 0.0);
    for (int qi = 0; qi < nq; ++qi) {
      const double a = a_by_q[qi];
      if (a == 0.0) continue;
      const double phi_q = cache.phi_table[static_cast<std::size_t>(l) * nq + qi];
      for (int j = 0; j < d; ++j) {
        const std::size_t idx = cache.cell(l, qi, j);
        s_phi[j] += a * phi_q * (cache.Hp[idx] / cache.H[idx]);
        ca[j] += a * cache.C[idx];
        cpa[j] += a * cache.Cp[idx];
      }
    }

    for (int u = 0; u < n; ++u) {
      const int j = cache.bins.membership[u];
      const double mj = cache.bins.sizes[j];
      double grad = rowremain[u] * fvec[u] - g.row_dot(u, pf);
      grad += (cache.weights[j] / mj) * s_phi[j];
      const double big = cache.omega_big[cache.lj(l, j)];
      if (config.rho != 0.0) {
        double dvar = 0.0;
        if (big > 0.0) {
          const double wu = config.omega.weight(col[u]);
          const double wpu = config.omega.weight_deriv(col[u]);
          const double dev = col[u] - cache.omega_mu[cache.lj(l, j)];
          dvar = (wpu * dev * dev + 2.0 * wu * dev - cache.omega_var[cache.lj(l, j)] * wpu) / big;
        }
        grad += config.rho * half_m * cache.weights[j] *
                (dvar * ca[j] + cache.omega_var[cache.lj(l, j)] / mj * cpa[j]);
      }
      out.grad_P[static_cast<std::size_t>(u) * k + l] += grad;
    }
  }
  out.value.J = out.value.U + config.rho * out.value.Gamma;
  return out;
}

}  // namespace

double u_value(const Graph& g, const AssignmentMatrix& P, const ObjectiveConfig& config) {
  return evaluate(g, P, config, false).value.U;
}

double gamma_value(const Graph& g, const AssignmentMatrix& P, const ObjectiveConfig& config) {
  return evaluate(g, P, config, false).value.Gamma;
}

ObjectiveValue objective_value_at(const Graph& g, const AssignmentMatrix& P,
                                  const ObjectiveConfig& config) {
  return evaluate(g, P, config, false).value;
}

ObjectiveValue objective_value(const Graph& g, const AssignmentState& state,
                               const ObjectiveConfig& config) {
  return objective_value_at(g, state.P, config);
}

BackwardResult backward(const Graph& g, const AssignmentState& state,
                        const ObjectiveConfig& config) {
  Evaluation eval = evaluate(g, state.P, config, true);
  const int n = state.n;
  const int k = state.k;
  BackwardResult out;
  out.value = eval.value;
  out.grad_P = std::move(eval.grad_P);
  out.grad_logits.assign(static_cast<std::size_t>(n) * k, 0.0);
  const double inv_tau = 1.0 / state.temperature;
  for (int i = 0; i < n; ++i) {
    double inner = 0.0;
    for (int l = 0; l < k; ++l) {
      inner += out.grad_P[static_cast<std::size_t>(i) * k + l] * state.P.at(i, l);
    }
    for (int l = 0; l < k; ++l) {
      out.grad_logits[static_cast<std::size_t>(i) * k + l] =
          inv_tau * state.P.at(i, l) * (out.grad_P[static_cast<std::size_t>(i) * k + l] - inner);
    }
  }
  return out;
}

double young_majorizer(const Graph& g, const AssignmentMatrix& P, const ObjectiveConfig& config) {
  if (!(config.eta > 0.0)) throw std::invalid_argument("young_majorizer: eta must be positive");
  const EnvelopeCache cache = build_envelope_cache(g, P, config);
  const double q_ref = *std::min_element(g.vertex_weights().begin(), g.vertex_weights().end());
  const int m = cache.m_ell;
  double total = 0.0;
  for (int l = 0; l < P.k; ++l) {
    const double cut = simd::sum(m_weights(g, P, l));
    for (int j = 0; j < cache.d(); ++j) {
      const double coef = kernel_value(q_ref, cache.bins.representatives[j],
                                       cache.means[cache.lj(l, j)], m, config.gap_kernel, nullptr);
      const double var = cache.plain_var[cache.lj(l, j)];
      total += 0.25 * m * cache.weights[j] * coef *
               (config.eta * cut * cut + var * var / config.eta);
    }
  }
  return total;
}

EnvelopeConstants envelope_constants(double q, double beta, int m) {
  if (!(q > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("envelope_constants: q and beta must be positive");
  }
  if (m == 0) return {0.0, 0.0, 0.0};
  const double c = q / beta + 1.0;
  EnvelopeConstants out;
  out.L = m / (q * c);
  out.K = 2.0 * m * (m - 1.0) / (q * c * (c + 1.0));
  out.logd = m * (c + m - 1.0) / (c * (c - 1.0));
  return out;
}

namespace {

Graph gather_subgraph(const Graph& g, std::span<const int> batch, std::vector<double>* s_out) {
  const int b = static_cast<int>(batch.size());
  std::vector<int> pos(g.size(), -1);
  for (int t = 0; t < b; ++t) pos[batch[t]] = t;
  std::vector<GraphEdge> edges;
  for (const GraphEdge& e : g.edges()) {
    if (pos[e.i] >= 0 && pos[e.j] >= 0) edges.push_back({pos[e.i], pos[e.j], e.w});
  }
  // Vertex weights come from the full graph so the batch objective stays on
  // the same scale; custom mode carries them through the gather.
  std::vector<double> s(b);
  for (int t = 0; t < b; ++t) s[t] = g.vertex_weight(batch[t]);
  if (s_out) *s_out = s;
  return Graph::from_edges(b, edges, WeightMode::custom, std::move(s));
}

}  // namespace

OptimizeResult optimize(const Graph& g, const ObjectiveConfig& config, const OptParams& params,
                        int k) {
  if (params.steps < 0) throw std::invalid_argument("optimize: steps must be nonnegative");
  if (k < 1) throw std::invalid_argument("optimize: need k >= 1");
  if (!(params.tau0 > 0.0) || !(params.tau_min > 0.0)) {
    throw std::invalid_argument("optimize: temperatures must be positive");
  }
  const int n = g.size();
  std::vector<double> init(static_cast<std::size_t>(n) * k);
  {
    SplitMix64 rng = substream(params.seed, 0);
    for (double& v : init) v = params.init_scale * rng.next_normal();
  }
  AssignmentState state = AssignmentState::from_logits(n, k, std::move(init), params.tau0);
  std::vector<double> velocity(static_cast<std::size_t>(n) * k, 0.0);

  const bool frozen = params.step_size == 0.0;
  const double decay = params.steps > 1
                           ? std::pow(params.tau_min / params.tau0,
                                      1.0 / static_cast<double>(params.steps - 1))
                           : 1.0;
  const int batch = params.batch_size > 0 && params.batch_size < n ? params.batch_size : 0;

  OptimizeResult result;
  auto log_row = [&](int step) {
    const ObjectiveValue v = objective_value(g, state, config);
    if (!std::isfinite(v.J)) throw std::runtime_error("optimize: objective diverged");
    const HardPartition part = state.P.argmax_rounding();
    result.trace.push_back({step, v.J, v.U, v.Gamma, graphcut_discrete(g, part),
                            state.temperature});
  };

  double tau = params.tau0;
  for (int step = 0; step < params.steps; ++step) {
    if (!frozen) {
      tau = step == 0 ? params.tau0 : tau * decay;
      state.set_temperature(tau);
    }
    if (step % std::max(1, params.log_interval) == 0) log_row(step);

    if (frozen) continue;

    std::vector<double> grad(static_cast<std::size_t>(n) * k, 0.0);
    if (batch == 0) {
      BackwardResult back = backward(g, state, config);
      if (!std::isfinite(back.value.J)) throw std::runtime_error("optimize: objective diverged");
      grad = std::move(back.grad_logits);
    } else {
      // Sample a batch without replacement, run the backward pass on the
      // gathered subgraph, scatter into the full gradient.
      SplitMix64 rng = substream(params.seed, 1000 + static_cast<std::uint64_t>(step));
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      for (int t = 0; t < batch; ++t) {
        const int swap = t + static_cast<int>(rng.next_below(n - t));
        std::swap(order[t], order[swap]);
      }
      std::vector<int> chosen(order.begin(), order.begin() + batch);
      std::sort(chosen.begin(), chosen.end());
      Graph sub = gather_subgraph(g, chosen, nullptr);
      std::vector<double> sub_logits(static_cast<std::size_t>(batch) * k);
      for (int t = 0; t < batch; ++t) {
        for (int l = 0; l < k; ++l) {
          sub_logits[static_cast<std::size_t>(t) * k + l] = state.logit(chosen[t], l);
        }
      }
      AssignmentState sub_state = AssignmentState::from_logits(batch, k, std::move(sub_logits), tau);
      BackwardResult back = backward(sub, sub_state, config);
      if (!std::isfinite(back.value.J)) throw std::runtime_error("optimize: objective diverged");
      for (int t = 0; t < batch; ++t) {
        for (int l = 0; l < k; ++l) {
          grad[static_cast<std::size_t>(chosen[t]) * k + l] =
              back.grad_logits[static_cast<std::size_t>(t) * k + l];
        }
      }
    }

    for (std::size_t idx = 0; idx < velocity.size(); ++idx) {
      velocity[idx] = params.momentum * velocity[idx] - params.step_size * grad[idx];
      state.logits[idx] += velocity[idx];
    }
    state.refresh();
  }

  log_row(params.steps);
  result.final_partition = state.P.argmax_rounding();
  result.final_discrete_cut = graphcut_discrete(g, result.final_partition);
  result.state = std::move(state);
  return result;
}

}  // namespace pgcut
