#include "spg/graph.hpp"

#include <algorithm>
#include <string>

#include "spg/error.hpp"

namespace spg {

Graph::Graph(std::size_t n, bool directed)
    : n_(n), directed_(directed), offsets_(n + 1, 0) {}

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges,
                        bool directed, bool weighted) {
  struct Entry {
    VertexId src, dst;
    double w;
  };
  std::vector<Entry> entries;
  entries.reserve(directed ? edges.size() : 2 * edges.size());
  for (const Edge& e : edges) {
    if (e.u >= n || e.v >= n) {
      throw DimensionError("edge (" + std::to_string(e.u) + ", " +
                           std::to_string(e.v) + ") outside vertex range [0, " +
                           std::to_string(n) + ")");
    }
    if (e.u == e.v) continue;
    entries.push_back({e.u, e.v, e.weight});
    if (!directed) entries.push_back({e.v, e.u, e.weight});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });

  Graph g(n, directed);
  g.targets_.reserve(entries.size());
  if (weighted) g.weights_.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Entry& e = entries[k];
    const bool dup = k > 0 && entries[k - 1].src == e.src &&
                     entries[k - 1].dst == e.dst;
    if (dup) {
      if (weighted) g.weights_.back() += e.w;
      continue;
    }
    g.targets_.push_back(e.dst);
    if (weighted) g.weights_.push_back(e.w);
    ++g.offsets_[e.src + 1];
  }
  for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] += g.offsets_[v];
  g.num_edges_ = directed ? g.targets_.size() : g.targets_.size() / 2;
  return g;
}

std::span<const VertexId> Graph::neighbors(VertexId v) const {
  return {targets_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

std::span<const double> Graph::neighbor_weights(VertexId v) const {
  if (weights_.empty()) return {};
  return {weights_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

std::size_t Graph::out_degree(VertexId v) const {
  return offsets_[v + 1] - offsets_[v];
}

double Graph::weighted_degree(VertexId v) const {
  if (weights_.empty()) return static_cast<double>(out_degree(v));
  double s = 0.0;
  for (double w : neighbor_weights(v)) s += w;
  return s;
}

bool Graph::has_edge(VertexId u, VertexId v) const {
  if (u >= n_ || v >= n_) return false;
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

double Graph::weight(VertexId u, VertexId v) const {
  if (u >= n_ || v >= n_) return 0.0;
  auto nb = neighbors(u);
  auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) return 0.0;
  if (weights_.empty()) return 1.0;
  return weights_[offsets_[u] + static_cast<std::size_t>(it - nb.begin())];
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges_);
  for (VertexId u = 0; u < n_; ++u) {
    auto nb = neighbors(u);
    auto ws = neighbor_weights(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (!directed_ && nb[k] < u) continue;
      out.push_back({u, nb[k], ws.empty() ? 1.0 : ws[k]});
    }
  }
  return out;
}

std::size_t Graph::multiply_add(std::span<const double> x,
                                std::span<double> y, double alpha) const {
  if (x.size() != n_ || y.size() != n_) {
    throw DimensionError("multiply_add: vector length does not match graph");
  }
  std::size_t touched = 0;
  for (std::size_t u = 0; u < n_; ++u) {
    double acc = 0.0;
    const std::size_t begin = offsets_[u], end = offsets_[u + 1];
    touched += end - begin;
    if (weights_.empty()) {
      for (std::size_t k = begin; k < end; ++k) acc += x[targets_[k]];
    } else {
      for (std::size_t k = begin; k < end; ++k)
        acc += weights_[k] * x[targets_[k]];
    }
    y[u] += alpha * acc;
  }
  return touched;
}

std::size_t degree(const Graph& g, VertexId i) {
  if (i >= g.num_vertices()) {
    throw DimensionError("vertex " + std::to_string(i) + " out of range");
  }
  return g.out_degree(i);
}

double edge_error_rate(const Graph& truth, const Graph& observed) {
  if (truth.num_vertices() != observed.num_vertices()) {
    throw DimensionError("edge_error_rate: vertex counts differ");
  }
  if (truth.num_edges() == 0) {
    throw DimensionError("edge_error_rate: truth graph has no edges");
  }
  // Sorted adjacency lists: merge-count the symmetric difference.
  std::size_t diff = 0;
  for (VertexId u = 0; u < truth.num_vertices(); ++u) {
    auto a = truth.neighbors(u);
    auto b = observed.neighbors(u);
    std::size_t i = 0, j = 0, common = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] < b[j]) {
        ++i;
      } else if (b[j] < a[i]) {
        ++j;
      } else {
        ++common, ++i, ++j;
      }
    }
    diff += (a.size() - common) + (b.size() - common);
  }
  // Undirected pairs were counted from both endpoints.
  const bool halve = !truth.directed() && !observed.directed();
  const double missing_plus_spurious =
      halve ? static_cast<double>(diff) / 2.0 : static_cast<double>(diff);
  return missing_plus_spurious / static_cast<double>(truth.num_edges());
}

void VertexAttributes::validate() const {
  if (features.size() != size() * dimension) {
    throw DimensionError("attribute feature array has " +
                         std::to_string(features.size()) +
                         " values, expected " +
                         std::to_string(size() * dimension));
  }
  for (auto c : categories) {
    if (c >= num_categories) {
      throw DimensionError("category label " + std::to_string(c) +
                           " not below category count " +
                           std::to_string(num_categories));
    }
  }
}

TemporalGraphSequence::TemporalGraphSequence(std::vector<Graph> snapshots)
    : snapshots_(std::move(snapshots)) {
  if (snapshots_.empty()) {
    throw DimensionError("temporal sequence needs at least one snapshot");
  }
  for (const Graph& g : snapshots_) {
    if (g.num_vertices() != snapshots_.front().num_vertices()) {
      throw DimensionError("temporal snapshots disagree on vertex count");
    }
  }
}

}  // namespace spg
