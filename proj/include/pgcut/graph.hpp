#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pgcut {

// Vertex-weight modes: ratio uses s = 1, normalized uses s = degree,
// custom takes an explicit strictly positive vector.
enum class WeightMode { ratio, normalized, custom };

struct GraphEdge {
  int i;
  int j;
  double w;
};

enum class GraphFormat { edge_tsv, json };

// Immutable symmetric nonnegative weighted graph with zero diagonal.
// Dense row storage up to kDenseLimit vertices, CSR beyond. All accessors
// are const; concurrent readers are safe.
class Graph {
 public:
  static constexpr int kDenseLimit = 4096;

  // Edges are undirected, listed once, with i != j and w >= 0. Duplicate
  // pairs (either orientation) are rejected. Normalized mode rejects
  // isolated (zero-degree) vertices.
  static Graph from_edges(int n, std::span<const GraphEdge> edges, WeightMode mode,
                          std::vector<double> custom_s = {});

  // Same topology, different vertex-weight mode.
  Graph with_mode(WeightMode mode, std::vector<double> custom_s = {}) const;

  int size() const { return n_; }
  WeightMode weight_mode() const { return mode_; }
  bool dense() const { return dense_; }
  double degree(int i) const { return degrees_[i]; }
  const std::vector<double>& degrees() const { return degrees_; }
  double vertex_weight(int i) const { return s_[i]; }
  const std::vector<double>& vertex_weights() const { return s_; }
  double total_weight() const { return total_weight_; }  // sum over undirected edges
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<GraphEdge>& edges() const { return edges_; }

  double weight(int i, int j) const;
  // sum_j W_ij x_j
  double row_dot(int i, std::span<const double> x) const;
  // dense row view; only valid when dense()
  std::span<const double> row(int i) const;

 private:
  Graph() = default;

  int n_ = 0;
  WeightMode mode_ = WeightMode::ratio;
  bool dense_ = true;
  std::vector<GraphEdge> edges_;     // canonical i < j list, sorted
  std::vector<double> w_;            // dense n*n, row-major
  std::vector<int> row_ptr_, col_;   // CSR with both directions
  std::vector<double> val_;
  std::vector<double> degrees_;
  std::vector<double> s_;
  double total_weight_ = 0.0;
};

struct HardPartition {
  std::vector<int> labels;  // cluster ids in [0, k)
  int k = 0;
};

// Row-stochastic soft assignment of n vertices to k clusters.
struct AssignmentMatrix {
  int n = 0;
  int k = 0;
  std::vector<double> p;  // row-major n*k

  double& at(int i, int l) { return p[static_cast<std::size_t>(i) * k + l]; }
  double at(int i, int l) const { return p[static_cast<std::size_t>(i) * k + l]; }
  std::vector<double> column(int l) const;
  void validate() const;  // rows on the simplex within 1e-12

  static AssignmentMatrix uniform(int n, int k);
  static AssignmentMatrix from_labels(const HardPartition& part);
  HardPartition argmax_rounding() const;  // ties break to the lowest index
};

// 1_A^T W 1_{A-complement}; in_subset is an indicator over vertices.
double cut_value(const Graph& g, std::span<const std::uint8_t> in_subset);

// Half the sum of per-cluster volume-normalized cuts; empty clusters
// contribute zero.
double graphcut_discrete(const Graph& g, const HardPartition& part);

// Exact E[cut(a)/vol(a)] for one cluster column under independent Bernoulli
// memberships, with vcut(empty) = 0. Enumeration over 2^n outcomes; the
// summation order matches graphcut_discrete so binary columns reproduce the
// discrete value bit for bit.
double expected_vcut_exact(const Graph& g, std::span<const double> p_column);

// Half the sum of expected_vcut_exact over cluster columns. Throws
// std::length_error for n > 20.
double expected_graphcut_exact(const Graph& g, const AssignmentMatrix& P);

inline constexpr int kExpectedCutEnumLimit = 20;

struct SbmSample {
  Graph graph;
  HardPartition planted;
};

// Symmetric 0/1 stochastic block model with contiguous near-equal blocks.
SbmSample generate_sbm(int n, int k, double p_in, double p_out, std::uint64_t seed,
                       WeightMode mode = WeightMode::ratio);

enum class ViewGraphMode { dense, knn };

// Similarity graph W_ab = exp(<z_a, z_b> / temperature) with zero diagonal.
// knn keeps each row's strongest knn_k entries, symmetrized by union.
Graph build_view_graph(const std::vector<std::vector<double>>& embeddings, double temperature,
                       ViewGraphMode mode = ViewGraphMode::dense, int knn_k = 0,
                       WeightMode weight_mode = WeightMode::ratio);

// edge_tsv: header line "#n=<count>", then "i<TAB>j<TAB>w" with 0-based
// indices, each undirected edge listed once. Weights round-trip losslessly
// (shortest decimal). json carries n, weight mode and the edge list.
Graph read_graph(const std::string& path);
void write_graph(const Graph& g, const std::string& path, GraphFormat format = GraphFormat::edge_tsv);

double adjusted_rand_index(const HardPartition& a, const HardPartition& b);

}  // namespace pgcut
