#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spg {

using VertexId = std::uint32_t;

struct Edge {
  VertexId u = 0;
  VertexId v = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Immutable sparse graph in compressed adjacency form.
///
/// Undirected graphs store each edge in both adjacency lists; num_edges()
/// counts unordered pairs. Adjacency lists are sorted, free of self-loops and
/// duplicates. Weighted graphs carry one real weight per stored entry.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n, bool directed = false);

  /// Builds a graph from an edge list. Self-loops are dropped. Duplicate
  /// pairs are merged: unweighted graphs keep one copy, weighted graphs sum
  /// the weights. Throws DimensionError on endpoints outside [0, n).
  static Graph from_edges(std::size_t n, std::span<const Edge> edges,
                          bool directed = false, bool weighted = false);

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return num_edges_; }
  /// Number of stored adjacency entries (2 * num_edges() when undirected).
  std::size_t nnz() const noexcept { return targets_.size(); }
  bool directed() const noexcept { return directed_; }
  bool weighted() const noexcept { return !weights_.empty(); }

  std::span<const VertexId> neighbors(VertexId v) const;
  /// Empty when the graph is unweighted.
  std::span<const double> neighbor_weights(VertexId v) const;
  std::size_t out_degree(VertexId v) const;
  /// Sum of incident weights (equals out_degree for unweighted graphs).
  double weighted_degree(VertexId v) const;

  bool has_edge(VertexId u, VertexId v) const;
  /// Weight of (u, v), or 0 when absent.
  double weight(VertexId u, VertexId v) const;

  /// Canonical edge list: u < v for undirected graphs, sorted.
  std::vector<Edge> edges() const;

  /// y += alpha * A x. Returns the number of adjacency entries touched.
  std::size_t multiply_add(std::span<const double> x, std::span<double> y,
                    double alpha = 1.0) const;

  friend bool operator==(const Graph& a, const Graph& b) = default;

 private:
  std::size_t n_ = 0;
  bool directed_ = false;
  std::size_t num_edges_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<VertexId> targets_;
  std::vector<double> weights_;
};

/// Out-degree of vertex i. Throws DimensionError when i is out of range.
std::size_t degree(const Graph& g, VertexId i);

/// (missing + spurious edges) / |E_truth|. Requires equal vertex counts and a
/// non-empty truth graph.
double edge_error_rate(const Graph& truth, const Graph& observed);

/// Per-vertex feature vectors (row-major, dimension d) and category labels.
struct VertexAttributes {
  std::size_t dimension = 0;
  std::size_t num_categories = 0;
  std::vector<double> features;
  std::vector<std::uint32_t> categories;

  std::size_t size() const noexcept { return categories.size(); }
  std::span<const double> feature(VertexId v) const {
    return {features.data() + static_cast<std::size_t>(v) * dimension,
            dimension};
  }
  /// Throws DimensionError if the arrays disagree with size() or a category
  /// label is out of range.
  void validate() const;
};

/// Ordered snapshots over a common vertex set.
class TemporalGraphSequence {
 public:
  explicit TemporalGraphSequence(std::vector<Graph> snapshots);

  std::size_t num_snapshots() const noexcept { return snapshots_.size(); }
  std::size_t num_vertices() const noexcept {
    return snapshots_.front().num_vertices();
  }
  const Graph& operator[](std::size_t t) const { return snapshots_[t]; }
  const std::vector<Graph>& snapshots() const noexcept { return snapshots_; }

 private:
  std::vector<Graph> snapshots_;
};

}  // namespace spg
