#include "pgcut/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pgcut/rng.hpp"
#include "pgcut/simd/kernels.hpp"

namespace pgcut {

namespace {

std::string shortest_decimal(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

Graph Graph::from_edges(int n, std::span<const GraphEdge> edges, WeightMode mode,
                        std::vector<double> custom_s) {
  if (n < 0) throw std::invalid_argument("Graph: n must be nonnegative");
  Graph g;
  g.n_ = n;
  g.mode_ = mode;
  g.dense_ = n <= kDenseLimit;
  g.degrees_.assign(n, 0.0);

  g.edges_.reserve(edges.size());
  for (const GraphEdge& e : edges) {
    if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n) {
      throw std::invalid_argument("Graph: edge endpoint out of range");
    }
    if (e.i == e.j) throw std::invalid_argument("Graph: nonzero diagonal entry");
    if (!(e.w >= 0.0) || !std::isfinite(e.w)) {
      throw std::invalid_argument("Graph: edge weights must be finite and nonnegative");
    }
    g.edges_.push_back({std::min(e.i, e.j), std::max(e.i, e.j), e.w});
  }
  std::sort(g.edges_.begin(), g.edges_.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (std::size_t t = 1; t < g.edges_.size(); ++t) {
    if (g.edges_[t].i == g.edges_[t - 1].i && g.edges_[t].j == g.edges_[t - 1].j) {
      throw std::invalid_argument("Graph: duplicate edge (" + std::to_string(g.edges_[t].i) + "," +
                                  std::to_string(g.edges_[t].j) + ")");
    }
  }

  for (const GraphEdge& e : g.edges_) {
    g.degrees_[e.i] += e.w;
    g.degrees_[e.j] += e.w;
    g.total_weight_ += e.w;
  }

  if (g.dense_) {
    g.w_.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (const GraphEdge& e : g.edges_) {
      g.w_[static_cast<std::size_t>(e.i) * n + e.j] = e.w;
      g.w_[static_cast<std::size_t>(e.j) * n + e.i] = e.w;
    }
  } else {
    std::vector<int> counts(n, 0);
    for (const GraphEdge& e : g.edges_) {
      ++counts[e.i];
      ++counts[e.j];
    }
    g.row_ptr_.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) g.row_ptr_[i + 1] = g.row_ptr_[i] + counts[i];
    g.col_.resize(g.row_ptr_[n]);
    g.val_.resize(g.row_ptr_[n]);
    std::vector<int> cursor(g.row_ptr_.begin(), g.row_ptr_.end() - 1);
    for (const GraphEdge& e : g.edges_) {
      g.col_[cursor[e.i]] = e.j;
      g.val_[cursor[e.i]++] = e.w;
      g.col_[cursor[e.j]] = e.i;
      g.val_[cursor[e.j]++] = e.w;
    }
  }

  switch (mode) {
    case WeightMode::ratio:
      g.s_.assign(n, 1.0);
      break;
    case WeightMode::normalized:
      for (int i = 0; i < n; ++i) {
        if (!(g.degrees_[i] > 0.0)) {
          throw std::invalid_argument("Graph: normalized mode rejects isolated vertex " +
                                      std::to_string(i));
        }
      }
      g.s_ = g.degrees_;
      break;
    case WeightMode::custom:
      if (static_cast<int>(custom_s.size()) != n) {
        throw std::invalid_argument("Graph: custom vertex weights must have length n");
      }
      for (double s : custom_s) {
        if (!(s > 0.0)) throw std::invalid_argument("Graph: custom vertex weights must be positive");
      }
      g.s_ = std::move(custom_s);
      break;
  }
  return g;
}

Graph Graph::with_mode(WeightMode mode, std::vector<double> custom_s) const {
  return from_edges(n_, edges_, mode, std::move(custom_s));
}

double Graph::weight(int i, int j) const {
  if (i == j) return 0.0;
  if (dense_) return w_[static_cast<std::size_t>(i) * n_ + j];
  for (int t = row_ptr_[i]; t < row_ptr_[i + 1]; ++t) {
    if (col_[t] == j) return val_[t];
  }
  return 0.0;
}

double Graph::row_dot(int i, std::span<const double> x) const {
  if (dense_) return simd::dot(row(i), x);
  double acc = 0.0;
  for (int t = row_ptr_[i]; t < row_ptr_[i + 1]; ++t) acc += val_[t] * x[col_[t]];
  return acc;
}

std::span<const double> Graph::row(int i) const {
  return std::span<const double>(w_.data() + static_cast<std::size_t>(i) * n_, n_);
}

std::vector<double> AssignmentMatrix::column(int l) const {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = at(i, l);
  return out;
}

void AssignmentMatrix::validate() const {
  if (static_cast<int>(p.size()) != n * k) {
    throw std::invalid_argument("AssignmentMatrix: storage size mismatch");
  }
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int l = 0; l < k; ++l) {
      const double v = at(i, l);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("AssignmentMatrix: entries must lie in [0,1]");
      }
      row_sum += v;
    }
    if (std::abs(row_sum - 1.0) > 1e-12) {
      throw std::invalid_argument("AssignmentMatrix: row " + std::to_string(i) +
                                  " does not sum to 1");
    }
  }
}

AssignmentMatrix AssignmentMatrix::uniform(int n, int k) {
  AssignmentMatrix P;
  P.n = n;
  P.k = k;
  P.p.assign(static_cast<std::size_t>(n) * k, 1.0 / k);
  return P;
}

AssignmentMatrix AssignmentMatrix::from_labels(const HardPartition& part) {
  AssignmentMatrix P;
  P.n = static_cast<int>(part.labels.size());
  P.k = part.k;
  P.p.assign(static_cast<std::size_t>(P.n) * P.k, 0.0);
  for (int i = 0; i < P.n; ++i) {
    const int l = part.labels[i];
    if (l < 0 || l >= part.k) throw std::invalid_argument("from_labels: label out of range");
    P.at(i, l) = 1.0;
  }
  return P;
}

HardPartition AssignmentMatrix::argmax_rounding() const {
  HardPartition part;
  part.k = k;
  part.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double best_v = at(i, 0);
    for (int l = 1; l < k; ++l) {
      if (at(i, l) > best_v) {
        best_v = at(i, l);
        best = l;
      }
    }
    part.labels[i] = best;
  }
  return part;
}

double cut_value(const Graph& g, std::span<const std::uint8_t> in_subset) {
  if (static_cast<int>(in_subset.size()) != g.size()) {
    throw std::invalid_argument("cut_value: indicator size mismatch");
  }
  double cut = 0.0;
  for (const GraphEdge& e : g.edges()) {
    if (in_subset[e.i] != in_subset[e.j]) cut += e.w;
  }
  return cut;
}

double graphcut_discrete(const Graph& g, const HardPartition& part) {
  const int n = g.size();
  if (static_cast<int>(part.labels.size()) != n) {
    throw std::invalid_argument("graphcut_discrete: label size mismatch");
  }
  double total = 0.0;
  for (int l = 0; l < part.k; ++l) {
    // Accumulation order (i ascending, j < i ascending) deliberately matches
    // the exact enumeration path.
    double cut = 0.0;
    double vol = 0.0;
    for (int i = 0; i < n; ++i) {
      const bool in_i = part.labels[i] == l;
      for (int j = 0; j < i; ++j) {
        const bool in_j = part.labels[j] == l;
        if (in_i != in_j) cut += g.weight(j, i);
      }
      if (in_i) vol += g.vertex_weight(i);
    }
    if (vol > 0.0) total += cut / vol;
  }
  return 0.5 * total;
}

namespace {

struct VcutEnum {
  const Graph& g;
  std::span<const double> p;

  double run(int i, double prob, double cut, double vol, std::vector<std::uint8_t>& a) const {
    if (prob == 0.0) return 0.0;
    if (i == g.size()) return vol > 0.0 ? prob * (cut / vol) : 0.0;
    const double pi = p[i];
    double acc = 0.0;
    if (pi < 1.0) {
      double c = cut;
      for (int j = 0; j < i; ++j) {
        if (a[j]) c += g.weight(j, i);
      }
      a[i] = 0;
      acc += run(i + 1, prob * (1.0 - pi), c, vol, a);
    }
    if (pi > 0.0) {
      double c = cut;
      for (int j = 0; j < i; ++j) {
        if (!a[j]) c += g.weight(j, i);
      }
      a[i] = 1;
      acc += run(i + 1, prob * pi, c, vol + g.vertex_weight(i), a);
    }
    return acc;
  }
};

}  // namespace

double expected_vcut_exact(const Graph& g, std::span<const double> p_column) {
  if (static_cast<int>(p_column.size()) != g.size()) {
    throw std::invalid_argument("expected_vcut_exact: column size mismatch");
  }
  if (g.size() > kExpectedCutEnumLimit) {
    throw std::length_error("expected_vcut_exact: enumeration limited to n <= 20");
  }
  std::vector<std::uint8_t> a(g.size(), 0);
  return VcutEnum{g, p_column}.run(0, 1.0, 0.0, 0.0, a);
}

double expected_graphcut_exact(const Graph& g, const AssignmentMatrix& P) {
  if (P.n != g.size()) throw std::invalid_argument("expected_graphcut_exact: size mismatch");
  if (g.size() > kExpectedCutEnumLimit) {
    throw std::length_error("expected_graphcut_exact: enumeration limited to n <= 20");
  }
  P.validate();
  double total = 0.0;
  for (int l = 0; l < P.k; ++l) {
    total += expected_vcut_exact(g, P.column(l));
  }
  return 0.5 * total;
}

SbmSample generate_sbm(int n, int k, double p_in, double p_out, std::uint64_t seed,
                       WeightMode mode) {
  if (n < 1 || k < 1 || k > n) throw std::invalid_argument("generate_sbm: need 1 <= k <= n");
  if (!(p_out >= 0.0 && p_in <= 1.0 && p_out <= p_in)) {
    throw std::invalid_argument("generate_sbm: need 0 <= p_out <= p_in <= 1");
  }
  HardPartition planted;
  planted.k = k;
  planted.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    planted.labels[i] = static_cast<int>((static_cast<long>(i) * k) / n);
  }
  SplitMix64 rng(seed);
  std::vector<GraphEdge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = planted.labels[i] == planted.labels[j] ? p_in : p_out;
      const double u = rng.next_unit();
      if (u < p) edges.push_back({i, j, 1.0});
    }
  }
  return {Graph::from_edges(n, edges, mode), std::move(planted)};
}

Graph build_view_graph(const std::vector<std::vector<double>>& embeddings, double temperature,
                       ViewGraphMode mode, int knn_k, WeightMode weight_mode) {
  const int n = static_cast<int>(embeddings.size());
  if (n == 0) throw std::invalid_argument("build_view_graph: embeddings must be nonempty");
  if (!(temperature > 0.0)) throw std::invalid_argument("build_view_graph: temperature must be positive");
  const std::size_t dim = embeddings[0].size();
  for (const auto& z : embeddings) {
    if (z.size() != dim) throw std::invalid_argument("build_view_graph: embedding dimension mismatch");
  }
  std::vector<double> sim(static_cast<std::size_t>(n) * n, 0.0);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double ip = simd::dot(embeddings[a], embeddings[b]);
      const double w = std::exp(ip / temperature);
      sim[static_cast<std::size_t>(a) * n + b] = w;
      sim[static_cast<std::size_t>(b) * n + a] = w;
    }
  }
  std::vector<GraphEdge> edges;
  if (mode == ViewGraphMode::dense) {
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        edges.push_back({a, b, sim[static_cast<std::size_t>(a) * n + b]});
      }
    }
  } else {
    if (knn_k < 1) throw std::invalid_argument("build_view_graph: knn mode needs knn_k >= 1");
    std::vector<std::uint8_t> keep(static_cast<std::size_t>(n) * n, 0);
    std::vector<int> order(n);
    for (int a = 0; a < n; ++a) {
      order.clear();
      for (int b = 0; b < n; ++b) {
        if (b != a) order.push_back(b);
      }
      const int kk = std::min<int>(knn_k, static_cast<int>(order.size()));
      std::partial_sort(order.begin(), order.begin() + kk, order.end(), [&](int x, int y) {
        const double wx = sim[static_cast<std::size_t>(a) * n + x];
        const double wy = sim[static_cast<std::size_t>(a) * n + y];
        return wx != wy ? wx > wy : x < y;
      });
      for (int t = 0; t < kk; ++t) {
        const int b = order[t];
        keep[static_cast<std::size_t>(std::min(a, b)) * n + std::max(a, b)] = 1;
      }
    }
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (keep[static_cast<std::size_t>(a) * n + b]) {
          edges.push_back({a, b, sim[static_cast<std::size_t>(a) * n + b]});
        }
      }
    }
  }
  return Graph::from_edges(n, edges, weight_mode);
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

Graph read_edge_tsv(const std::string& path, std::ifstream& in) {
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  ++line_no;
  if (line.rfind("#n=", 0) != 0) parse_fail(path, line_no, "expected header '#n=<count>'");
  int n = 0;
  {
    const char* first = line.data() + 3;
    const char* last = line.data() + line.size();
    auto res = std::from_chars(first, last, n);
    if (res.ec != std::errc() || res.ptr != last || n < 0) {
      parse_fail(path, line_no, "bad vertex count in header");
    }
  }
  std::vector<GraphEdge> edges;
  std::map<std::pair<int, int>, double> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    int i = 0, j = 0;
    double w = 0.0;
    const char* first = line.data();
    const char* last = line.data() + line.size();
    auto r1 = std::from_chars(first, last, i);
    if (r1.ec != std::errc() || r1.ptr == last || *r1.ptr != '\t') {
      parse_fail(path, line_no, "expected 'i<TAB>j<TAB>w'");
    }
    auto r2 = std::from_chars(r1.ptr + 1, last, j);
    if (r2.ec != std::errc() || r2.ptr == last || *r2.ptr != '\t') {
      parse_fail(path, line_no, "expected 'i<TAB>j<TAB>w'");
    }
    auto r3 = std::from_chars(r2.ptr + 1, last, w);
    if (r3.ec != std::errc() || r3.ptr != last) parse_fail(path, line_no, "bad weight field");
    if (i == j) parse_fail(path, line_no, "diagonal entry not allowed");
    if (i < 0 || i >= n || j < 0 || j >= n) parse_fail(path, line_no, "vertex index out of range");
    if (!(w >= 0.0) || !std::isfinite(w)) parse_fail(path, line_no, "weights must be finite and nonnegative");
    const auto key = std::make_pair(std::min(i, j), std::max(i, j));
    auto [it, inserted] = seen.emplace(key, w);
    if (!inserted) {
      if (it->second != w) {
        parse_fail(path, line_no, "edge listed twice with asymmetric weights");
      }
      parse_fail(path, line_no, "duplicate edge");
    }
    edges.push_back({i, j, w});
  }
  return Graph::from_edges(n, edges, WeightMode::ratio);
}

Graph read_json(const std::string& path, std::ifstream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  const int n = doc.at("n").get<int>();
  std::vector<GraphEdge> edges;
  for (const auto& e : doc.at("edges")) {
    edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
  }
  WeightMode mode = WeightMode::ratio;
  std::vector<double> custom;
  if (doc.contains("weight_mode")) {
    const std::string m = doc["weight_mode"].get<std::string>();
    if (m == "ratio") {
      mode = WeightMode::ratio;
    } else if (m == "normalized") {
      mode = WeightMode::normalized;
    } else if (m == "custom") {
      mode = WeightMode::custom;
      custom = doc.at("custom_s").get<std::vector<double>>();
    } else {
      throw std::runtime_error(path + ": unknown weight_mode '" + m + "'");
    }
  }
  // Re-run the duplicate check with source context.
  std::map<std::pair<int, int>, double> seen;
  for (const GraphEdge& e : edges) {
    const auto key = std::make_pair(std::min(e.i, e.j), std::max(e.i, e.j));
    auto [it, inserted] = seen.emplace(key, e.w);
    if (!inserted) {
      if (it->second != e.w) throw std::runtime_error(path + ": edge listed twice with asymmetric weights");
      throw std::runtime_error(path + ": duplicate edge");
    }
  }
  return Graph::from_edges(n, edges, mode, std::move(custom));
}

}  // namespace

Graph read_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_graph: cannot open " + path);
  const int first = in.peek();
  if (first == '{') return read_json(path, in);
  return read_edge_tsv(path, in);
}

void write_graph(const Graph& g, const std::string& path, GraphFormat format) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_graph: cannot open " + path);
  if (format == GraphFormat::edge_tsv) {
    out << "#n=" << g.size() << "\n";
    for (const GraphEdge& e : g.edges()) {
      out << e.i << '\t' << e.j << '\t' << shortest_decimal(e.w) << "\n";
    }
  } else {
    nlohmann::json doc;
    doc["n"] = g.size();
    switch (g.weight_mode()) {
      case WeightMode::ratio:
        doc["weight_mode"] = "ratio";
        break;
      case WeightMode::normalized:
        doc["weight_mode"] = "normalized";
        break;
      case WeightMode::custom:
        doc["weight_mode"] = "custom";
        doc["custom_s"] = g.vertex_weights();
        break;
    }
    doc["edges"] = nlohmann::json::array();
    for (const GraphEdge& e : g.edges()) {
      doc["edges"].push_back({e.i, e.j, e.w});
    }
    out << doc.dump(2) << "\n";
  }
  if (!out) throw std::runtime_error("write_graph: write failed for " + path);
}

double adjusted_rand_index(const HardPartition& a, const HardPartition& b) {
  if (a.labels.size() != b.labels.size()) {
    throw std::invalid_argument("adjusted_rand_index: size mismatch");
  }
  const int n = static_cast<int>(a.labels.size());
  const int ka = a.k, kb = b.k;
  std::vector<long> table(static_cast<std::size_t>(ka) * kb, 0);
  std::vector<long> row(ka, 0), col(kb, 0);
  for (int i = 0; i < n; ++i) {
    ++table[static_cast<std::size_t>(a.labels[i]) * kb + b.labels[i]];
    ++row[a.labels[i]];
    ++col[b.labels[i]];
  }
  auto choose2 = [](long x) { return 0.5 * static_cast<double>(x) * (x - 1); };
  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (long v : table) sum_ij += choose2(v);
  for (long v : row) sum_a += choose2(v);
  for (long v : col) sum_b += choose2(v);
  const double expected = sum_a * sum_b / choose2(n);
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_ij - expected) / (max_index - expected);
}

}  // namespace pgcut
