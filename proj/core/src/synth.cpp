#include "spg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "pair_sampler.hpp"
#include "spg/error.hpp"
#include "spg/rng.hpp"

namespace spg {
namespace {

std::vector<VertexId> choose_vertices(std::size_t n, std::size_t k, Rng& rng) {
  // Partial Fisher-Yates.
  std::vector<VertexId> perm(n);
  std::iota(perm.begin(), perm.end(), VertexId{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(perm[i], perm[pick(rng)]);
  }
  perm.resize(k);
  std::sort(perm.begin(), perm.end());
  return perm;
}

std::vector<VertexId> embedding_vertices(std::size_t n,
                                         const EmbeddingSpec& spec, Rng& rng) {
  if (!spec.vertices.empty()) {
    auto v = spec.vertices;
    std::sort(v.begin(), v.end());
    return v;
  }
  return choose_vertices(n, spec.size, rng);
}

std::vector<Edge> internal_edges(const std::vector<VertexId>& vertices,
                                 double density, Rng& rng) {
  std::vector<Edge> out;
  std::bernoulli_distribution coin(std::clamp(density, 0.0, 1.0));
  for (std::size_t a = 0; a < vertices.size(); ++a)
    for (std::size_t b = a + 1; b < vertices.size(); ++b)
      if (coin(rng)) out.push_back({vertices[a], vertices[b], 1.0});
  return out;
}

Graph with_added_edges(const Graph& g, std::vector<Edge> extra) {
  auto edges = g.edges();
  edges.insert(edges.end(), extra.begin(), extra.end());
  return Graph::from_edges(g.num_vertices(), edges, g.directed(), g.weighted());
}

}  // namespace

std::size_t RmatParams::edge_draws() const {
  return static_cast<std::size_t>(
      std::ceil(avg_degree * static_cast<double>(num_vertices()) / 2.0));
}

void RmatParams::validate() const {
  if (scale < 1 || scale > 30) throw ConfigError("R-MAT scale must be in [1, 30]");
  if (!(avg_degree > 0.0)) throw ConfigError("R-MAT avg_degree must be > 0");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw ConfigError("R-MAT probabilities must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ConfigError("R-MAT probabilities must sum to 1");
  }
}

std::vector<Edge> rmat_edge_stream(const RmatParams& params) {
  params.validate();
  Rng rng = make_rng(params.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double a = params.probs[0];
  const double ab = a + params.probs[1];
  const double abc = ab + params.probs[2];

  const std::size_t draws = params.edge_draws();
  std::vector<Edge> stream;
  stream.reserve(draws);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(draws * 2);
  for (std::size_t k = 0; k < draws; ++k) {
    std::uint64_t u = 0, v = 0;
    for (unsigned level = 0; level < params.scale; ++level) {
      const double r = unif(rng);
      u <<= 1;
      v <<= 1;
      if (r < a) {
      } else if (r < ab) {
        v |= 1;
      } else if (r < abc) {
        u |= 1;
      } else {
        u |= 1;
        v |= 1;
      }
    }
    if (u == v) continue;
    const std::uint64_t lo = std::min(u, v), hi = std::max(u, v);
    if (!seen.insert((lo << 32) | hi).second) continue;
    stream.push_back({static_cast<VertexId>(u), static_cast<VertexId>(v), 1.0});
  }
  return stream;
}

Graph rmat_generate(const RmatParams& params) {
  auto stream = rmat_edge_stream(params);
  return Graph::from_edges(params.num_vertices(), stream);
}

Graph glm_background_sample(const LowRankExpectedModel& model,
                            const VertexAttributes* attrs, std::uint64_t seed) {
  const std::size_t n = model.size();
  if (attrs) {
    if (attrs->size() != n) {
      throw DimensionError("attributes do not match model vertex count");
    }
    if (attrs->num_categories != model.num_categories() ||
        !std::equal(attrs->categories.begin(), attrs->categories.end(),
                    model.categories().begin())) {
      throw DimensionError("attribute categories do not match model");
    }
  }
  if (!model.is_symmetric()) {
    throw ConfigError("background sampling requires an undirected model");
  }
  const std::size_t k = model.num_categories();
  std::vector<std::vector<VertexId>> members(k);
  for (std::size_t i = 0; i < n; ++i)
    members[model.categories()[i]].push_back(static_cast<VertexId>(i));
  std::vector<detail::WeightedBlock> blocks;
  blocks.reserve(k);
  for (auto& m : members)
    blocks.push_back(detail::make_block(std::move(m), model.source()));

  Rng rng = make_rng(seed);
  std::vector<Edge> edges;
  auto emit = [&](VertexId u, VertexId v) { edges.push_back({u, v, 1.0}); };
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t s = r; s < k; ++s) {
      detail::sample_weighted_pairs(blocks[r], blocks[s], r == s,
                                    model.omega(r, s), rng, emit);
    }
  }
  return Graph::from_edges(n, edges);
}

VertexAttributes uniform_attributes(std::size_t n, std::size_t num_categories,
                                    std::size_t dimension, std::uint64_t seed) {
  if (num_categories == 0) throw ConfigError("need at least one category");
  Rng rng = make_rng(seed);
  VertexAttributes attrs;
  attrs.dimension = dimension;
  attrs.num_categories = num_categories;
  attrs.categories.resize(n);
  attrs.features.resize(n * dimension);
  std::uniform_int_distribution<std::uint32_t> cat(
      0, static_cast<std::uint32_t>(num_categories - 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    attrs.categories[i] = cat(rng);
    for (std::size_t d = 0; d < dimension; ++d)
      attrs.features[i * dimension + d] = unit(rng);
  }
  return attrs;
}

void EmbeddingSpec::validate(std::size_t n) const {
  if (!(density >= 0.0 && density <= 1.0)) {
    throw ConfigError("embedding density must be in [0, 1]");
  }
  const std::size_t k = vertices.empty() ? size : vertices.size();
  if (k > n) {
    throw ConfigError("embedding size " + std::to_string(k) +
                      " exceeds vertex count " + std::to_string(n));
  }
  if (!vertices.empty()) {
    auto v = vertices;
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end())
      throw ConfigError("embedding vertex list has duplicates");
    if (!v.empty() && v.back() >= n)
      throw ConfigError("embedding vertex out of range");
  }
  for (double m : temporal_profile)
    if (!(m >= 0.0)) throw ConfigError("temporal multipliers must be >= 0");
}

std::vector<double> default_temporal_profile() {
  return {0.25, 0.5, 0.75, 1.0, 1.0, 0.75, 0.5, 0.25};
}

EmbedResult embed_subgraph(const Graph& g, const EmbeddingSpec& spec,
                           std::uint64_t seed) {
  spec.validate(g.num_vertices());
  Rng rng = make_rng(seed);
  auto vertices = embedding_vertices(g.num_vertices(), spec, rng);
  auto extra = internal_edges(vertices, spec.density, rng);
  return {with_added_edges(g, std::move(extra)), std::move(vertices)};
}

DynamicEmbedResult dynamic_embed(const TemporalGraphSequence& seq,
                                 const EmbeddingSpec& spec,
                                 std::uint64_t seed) {
  spec.validate(seq.num_vertices());
  if (spec.temporal_profile.size() != seq.num_snapshots()) {
    throw ConfigError("temporal profile has " +
                      std::to_string(spec.temporal_profile.size()) +
                      " entries for " + std::to_string(seq.num_snapshots()) +
                      " snapshots");
  }
  Rng rng = make_rng(seed);
  auto vertices = embedding_vertices(seq.num_vertices(), spec, rng);
  std::vector<Graph> out;
  out.reserve(seq.num_snapshots());
  for (std::size_t t = 0; t < seq.num_snapshots(); ++t) {
    Rng snap_rng = make_rng(split_seed(seed, t));
    auto extra = internal_edges(
        vertices, spec.density * spec.temporal_profile[t], snap_rng);
    out.push_back(with_added_edges(seq[t], std::move(extra)));
  }
  return {TemporalGraphSequence(std::move(out)), std::move(vertices)};
}

}  // namespace spg
