#include "spg/fuse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spg/error.hpp"

namespace spg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logit(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return std::log(p) - std::log1p(-p);
}

double sigmoid(double x) {
  if (x == kInf) return 1.0;
  if (x == -kInf) return 0.0;
  return logistic_link(x);
}

// log P(obs | edge) - log P(obs | no edge) for a pair with observation bit
// `seen`, given the chance `flip` that the mechanism misreports the pair.
double log_ratio_flip(bool seen, double flip) {
  if (seen) {
    if (flip <= 0.0) return kInf;
    return std::log1p(-flip) - std::log(flip);
  }
  if (flip <= 0.0) return -kInf;
  return std::log(flip) - std::log1p(-flip);
}

double log_ratio_deletion(bool seen, double q) {
  if (seen) return kInf;  // deletion never creates edges
  return q <= 0.0 ? -kInf : std::log(q);
}

struct SourceModel {
  Mechanism mechanism;
  double param;
};

}  // namespace

double FusedGraph::value(VertexId u, VertexId v) const {
  if (mode == FusionMode::WeightedSum || values.has_edge(u, v)) {
    return values.weight(u, v);
  }
  if (!background) return 0.0;
  return std::clamp(background->probability(u, v), 0.0, 1.0);
}

std::vector<double> default_fusion_weights(std::span<const double> error_rates) {
  std::vector<double> w;
  double total = 0.0;
  for (double e : error_rates) {
    w.push_back(std::max(0.0, 1.0 - e));
    total += w.back();
  }
  if (total <= 0.0) throw ConfigError("fusion weights sum to zero");
  for (double& x : w) x /= total;
  return w;
}

FusedGraph weighted_sum_fusion(std::span<const ObservedGraph> observations,
                               std::span<const double> weights) {
  if (observations.empty()) throw ConfigError("fusion needs at least one source");
  if (weights.size() != observations.size()) {
    throw DimensionError("fusion: " + std::to_string(weights.size()) +
                         " weights for " + std::to_string(observations.size()) +
                         " observations");
  }
  const std::size_t n = observations.front().true_vertex_count;
  std::vector<Edge> edges;
  double total = 0.0;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    if (observations[i].true_vertex_count != n) {
      throw DimensionError("fusion sources disagree on vertex count");
    }
    total += weights[i];
    for (Edge e : observations[i].lifted().edges()) {
      e.weight = weights[i];
      edges.push_back(e);
    }
  }
  FusedGraph out;
  out.mode = FusionMode::WeightedSum;
  out.values = Graph::from_edges(n, edges, false, true);
  out.total_weight = total;
  return out;
}

FusedGraph bayesian_fusion(std::span<const ObservedGraph> observations,
                           std::span<const CorruptionSpec> specs,
                           const LowRankExpectedModel& prior) {
  if (observations.empty()) throw ConfigError("fusion needs at least one source");
  if (specs.size() != observations.size()) {
    throw DimensionError("bayesian fusion: one spec per observation required");
  }
  const std::size_t n = prior.size();
  std::vector<SourceModel> sources;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (observations[i].true_vertex_count != n ||
        observations[i].graph.num_vertices() != n) {
      throw DimensionError("bayesian fusion: source does not cover the prior's vertex set");
    }
    const Mechanism m = specs[i].mechanism();
    if (m != Mechanism::EdgeDeletion && m != Mechanism::UniformFlip &&
        m != Mechanism::DegreeFlip) {
      throw ConfigError("bayesian fusion: " + to_string(m) +
                        " has no pairwise-independent likelihood");
    }
    const double param = specs[i].scalar_parameter();
    if (m == Mechanism::UniformFlip && !(param < 1.0)) {
      throw ConfigError("bayesian fusion: flip probability must be < 1");
    }
    sources.push_back({m, param});
  }

  // Degree estimates for degree-based flip probabilities.
  const std::vector<double> ones(n, 1.0);
  const std::vector<double> dhat = expected_matvec(prior, ones);
  double dbar = 0.0;
  for (double d : dhat) dbar += d;
  dbar /= static_cast<double>(std::max<std::size_t>(n, 1));

  auto flip_probability = [&](const SourceModel& s, VertexId u, VertexId v) {
    if (s.mechanism == Mechanism::UniformFlip) return s.param;
    if (dbar <= 0.0) return 0.0;
    return std::min(1.0, s.param * dhat[u] * dhat[v] / (dbar * dbar));
  };

  auto posterior = [&](VertexId u, VertexId v) {
    double lo = logit(prior.probability(u, v));
    for (std::size_t i = 0; i < sources.size(); ++i) {
      const bool seen = observations[i].graph.has_edge(u, v);
      const SourceModel& s = sources[i];
      lo += s.mechanism == Mechanism::EdgeDeletion
                ? log_ratio_deletion(seen, s.param)
                : log_ratio_flip(seen, flip_probability(s, u, v));
    }
    if (std::isnan(lo)) {
      // Contradictory certain evidence: fall back to the prior.
      return std::clamp(prior.probability(u, v), 0.0, 1.0);
    }
    return sigmoid(lo);
  };

  // Union of observed pairs.
  std::vector<Edge> union_edges;
  for (const auto& obs : observations)
    for (const Edge& e : obs.graph.edges()) union_edges.push_back(e);
  std::sort(union_edges.begin(), union_edges.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  union_edges.erase(std::unique(union_edges.begin(), union_edges.end(),
                                [](const Edge& a, const Edge& b) {
                                  return a.u == b.u && a.v == b.v;
                                }),
                    union_edges.end());
  for (Edge& e : union_edges) e.weight = posterior(e.u, e.v);

  // Background for pairs no source reports: prior times the product of the
  // "absent" likelihood ratios, folded into the low-rank factors.
  std::vector<double> source(prior.source().begin(), prior.source().end());
  std::vector<double> target(prior.target().begin(), prior.target().end());
  double constant = 1.0;
  for (const SourceModel& s : sources) {
    switch (s.mechanism) {
      case Mechanism::EdgeDeletion:
        constant *= s.param;
        break;
      case Mechanism::UniformFlip:
        constant *= s.param / (1.0 - s.param);
        break;
      default: {
        const double c = dbar > 0.0 ? std::sqrt(s.param) / dbar : 0.0;
        for (std::size_t v = 0; v < n; ++v) {
          source[v] *= c * dhat[v];
          target[v] *= c * dhat[v];
        }
        break;
      }
    }
  }
  std::vector<double> omega(prior.omega().begin(), prior.omega().end());
  for (double& w : omega) w *= constant;

  FusedGraph out;
  out.mode = FusionMode::Bayesian;
  out.values = Graph::from_edges(n, union_edges, false, true);
  out.background = LowRankExpectedModel(
      std::move(source), std::move(target),
      {prior.categories().begin(), prior.categories().end()},
      prior.num_categories(), std::move(omega));
  out.total_weight = 1.0;
  return out;
}

LowRankExpectedModel deletion_corrected_prior(std::span<const ObservedGraph> observations,
                                              std::span<const CorruptionSpec> specs) {
  if (observations.empty() || specs.size() != observations.size()) {
    throw DimensionError("prior fit needs one spec per observation");
  }
  auto fit = [](const Graph& g) {
    const std::vector<std::uint32_t> cats(g.num_vertices(), 0);
    return fit_moment_matching(g, cats, 1);
  };
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].mechanism() != Mechanism::EdgeDeletion) continue;
    const double keep = 1.0 - specs[i].scalar_parameter();
    if (keep <= 0.0) break;
    return fit(observations[i].lifted()).scaled(1.0 / keep);
  }
  return fit(observations.front().lifted());
}

ResidualsOperator fused_residuals(const FusedGraph& fused,
                                  const LowRankExpectedModel& model) {
  const std::size_t n = fused.num_vertices();
  if (model.size() != n) throw DimensionError("fused graph and model sizes differ");
  ResidualsOperator op(n);
  if (fused.mode == FusionMode::WeightedSum) {
    op.add_graph(fused.values, 1.0);
    op.add_model(model, -fused.total_weight);
    return op;
  }
  // P_post = (posterior - background) on the reported pairs + background.
  std::vector<Edge> correction = fused.values.edges();
  for (Edge& e : correction)
    e.weight -= fused.background->probability(e.u, e.v);
  op.add_graph(Graph::from_edges(n, correction, false, true), 1.0);
  op.add_model(*fused.background, 1.0);
  op.add_model(model, -1.0);
  return op;
}

}  // namespace spg
