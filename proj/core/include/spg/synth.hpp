#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "spg/background_model.hpp"
#include "spg/graph.hpp"

namespace spg {

struct RmatParams {
  unsigned scale = 10;
  double avg_degree = 10.0;
  std::array<double, 4> probs{0.5, 0.125, 0.125, 0.25};
  std::uint64_t seed = 0;

  std::size_t num_vertices() const { return std::size_t{1} << scale; }
  /// ceil(avg_degree * n / 2) quadrant-descent draws.
  std::size_t edge_draws() const;
  /// Throws ConfigError on invalid parameters.
  void validate() const;
};

/// Distinct undirected edges in order of first draw (self-loops and repeats
/// dropped). Used directly by the streaming partition experiments.
std::vector<Edge> rmat_edge_stream(const RmatParams& params);

/// Undirected simple R-MAT graph on 2^scale vertices.
Graph rmat_generate(const RmatParams& params);

/// Independent Bernoulli(min(1, p_ij)) draw for each pair i < j of an
/// undirected low-rank model. attrs, when given, must agree with the model's
/// vertex count and categories.
Graph glm_background_sample(const LowRankExpectedModel& model,
                            const VertexAttributes* attrs, std::uint64_t seed);
inline Graph glm_background_sample(const LowRankExpectedModel& model,
                                   const VertexAttributes& attrs,
                                   std::uint64_t seed) {
  return glm_background_sample(model, &attrs, seed);
}

/// Uniform categories in [0, k) and features uniform in [0, 1]^d.
VertexAttributes uniform_attributes(std::size_t n, std::size_t num_categories,
                                    std::size_t dimension, std::uint64_t seed);

struct EmbeddingSpec {
  std::size_t size = 12;
  double density = 0.85;
  /// Empty: choose `size` vertices uniformly without replacement.
  std::vector<VertexId> vertices;
  /// Per-snapshot density multipliers (dynamic embedding only).
  std::vector<double> temporal_profile;

  void validate(std::size_t n) const;
};

/// Ramp up then down over 8 samples, peaking at 1.0.
std::vector<double> default_temporal_profile();

struct EmbedResult {
  Graph graph;
  std::vector<VertexId> vertices;  // sorted
};

/// Adds each internal pair among the selected vertices with probability
/// density; existing edges are kept.
EmbedResult embed_subgraph(const Graph& g, const EmbeddingSpec& spec,
                           std::uint64_t seed);

struct DynamicEmbedResult {
  TemporalGraphSequence sequence;
  std::vector<VertexId> vertices;  // sorted
};

/// Snapshot t receives an embedding of density density * profile[t] on one
/// vertex set shared across snapshots.
DynamicEmbedResult dynamic_embed(const TemporalGraphSequence& seq,
                                 const EmbeddingSpec& spec, std::uint64_t seed);

}  // namespace spg
