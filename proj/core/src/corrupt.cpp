#include "spg/corrupt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <json.hpp>

#include "pair_sampler.hpp"
#include "spg/rng.hpp"

namespace spg {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint64_t pair_key(VertexId a, VertexId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(std::string(what) + " must be in [0, 1]");
  }
}

// Row-wise cumulative confusion weights exp(-||z_i - z_u||^2 / b), u = i
// included with weight 1. Entries below 1e-15 are dropped.
struct SimilarityKernel {
  std::vector<std::size_t> offsets{0};
  std::vector<VertexId> ids;
  std::vector<double> cumulative;

  VertexId draw(VertexId i, VertexId exclude, Rng& rng) const {
    const std::size_t begin = offsets[i], end = offsets[i + 1];
    const double total = cumulative[end - 1];
    std::uniform_real_distribution<double> unif(0.0, total);
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double r = unif(rng);
      auto it = std::upper_bound(cumulative.begin() + begin,
                                 cumulative.begin() + end, r);
      if (it == cumulative.begin() + end) --it;
      const VertexId u = ids[static_cast<std::size_t>(it - cumulative.begin())];
      if (u != exclude) return u;
    }
    return i;
  }
};

SimilarityKernel build_kernel(const VertexAttributes& attrs,
                              const SimilarityConfusionParams& p) {
  const std::size_t n = attrs.size();
  SimilarityKernel k;
  k.offsets.reserve(n + 1);
  const double inv_b = p.bandwidth > 0.0 ? 1.0 / p.bandwidth : HUGE_VAL;
  for (std::size_t i = 0; i < n; ++i) {
    auto zi = attrs.feature(static_cast<VertexId>(i));
    double acc = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      double w = 1.0;
      if (u != i) {
        auto zu = attrs.feature(static_cast<VertexId>(u));
        double d2 = 0.0;
        for (std::size_t d = 0; d < zi.size(); ++d)
          d2 += (zi[d] - zu[d]) * (zi[d] - zu[d]);
        w = std::exp(-d2 * inv_b);
        if (!(w >= 1e-15)) continue;
      }
      acc += w;
      k.ids.push_back(static_cast<VertexId>(u));
      k.cumulative.push_back(acc);
    }
    k.offsets.push_back(k.ids.size());
  }
  return k;
}

const VertexAttributes& require_features(const VertexAttributes* attrs,
                                         std::size_t n,
                                         const SimilarityConfusionParams& p) {
  if (!attrs || attrs->size() != n || attrs->dimension == 0) {
    throw ConfigError("similarity confusion requires per-vertex feature vectors");
  }
  if (attrs->dimension != p.feature_dim) {
    throw DimensionError("feature dimension " +
                         std::to_string(attrs->dimension) +
                         " does not match mechanism feature_dim " +
                         std::to_string(p.feature_dim));
  }
  return *attrs;
}

ObservedGraph identity_observation(Graph g, const CorruptionSpec& spec) {
  ObservedGraph obs;
  obs.true_vertex_count = g.num_vertices();
  obs.vertex_map.resize(g.num_vertices());
  std::iota(obs.vertex_map.begin(), obs.vertex_map.end(), VertexId{0});
  obs.graph = std::move(g);
  obs.provenance = spec;
  return obs;
}

ObservedGraph induced_observation(const Graph& truth,
                                  const std::vector<char>& keep,
                                  const CorruptionSpec& spec) {
  const std::size_t n = truth.num_vertices();
  std::vector<VertexId> local(n, 0);
  ObservedGraph obs;
  obs.true_vertex_count = n;
  obs.provenance = spec;
  for (std::size_t v = 0; v < n; ++v) {
    if (keep[v]) {
      local[v] = static_cast<VertexId>(obs.vertex_map.size());
      obs.vertex_map.push_back(static_cast<VertexId>(v));
    }
  }
  std::vector<Edge> edges;
  for (const Edge& e : truth.edges())
    if (keep[e.u] && keep[e.v]) edges.push_back({local[e.u], local[e.v], 1.0});
  obs.graph = Graph::from_edges(obs.vertex_map.size(), edges);
  return obs;
}

// Toggles the state of each pair in `flips` (pair keys, possibly unsorted).
Graph toggle_pairs(const Graph& truth, std::vector<std::uint64_t> flips) {
  std::sort(flips.begin(), flips.end());
  flips.erase(std::unique(flips.begin(), flips.end()), flips.end());
  std::vector<Edge> edges;
  for (const Edge& e : truth.edges()) {
    if (!std::binary_search(flips.begin(), flips.end(), pair_key(e.u, e.v)))
      edges.push_back(e);
  }
  for (std::uint64_t key : flips) {
    const auto a = static_cast<VertexId>(key >> 32);
    const auto b = static_cast<VertexId>(key & 0xffffffffu);
    if (!truth.has_edge(a, b)) edges.push_back({a, b, 1.0});
  }
  return Graph::from_edges(truth.num_vertices(), edges);
}

std::vector<std::uint64_t> sample_flips(const std::vector<double>& weight,
                                        double scale, Rng& rng) {
  std::vector<VertexId> ids(weight.size());
  std::iota(ids.begin(), ids.end(), VertexId{0});
  auto block = detail::make_block(std::move(ids), weight);
  std::vector<std::uint64_t> flips;
  detail::sample_weighted_pairs(block, block, true, scale, rng,
                                [&](VertexId a, VertexId b) {
                                  flips.push_back(pair_key(a, b));
                                });
  return flips;
}

ObservedGraph apply_impl(const Graph& truth, const VertexAttributes* attrs,
                         const CorruptionSpec& spec,
                         const SimilarityKernel* kernel) {
  spec.validate();
  if (truth.directed()) {
    throw ConfigError("corruption mechanisms operate on undirected graphs");
  }
  const std::size_t n = truth.num_vertices();
  Rng rng = make_rng(spec.seed);

  return std::visit(
      overloaded{
          [&](const EdgeDeletionParams& p) {
            std::bernoulli_distribution drop(p.probability);
            std::vector<Edge> kept;
            for (const Edge& e : truth.edges())
              if (!drop(rng)) kept.push_back(e);
            return identity_observation(Graph::from_edges(n, kept), spec);
          },
          [&](const UniformFlipParams& p) {
            std::vector<double> ones(n, 1.0);
            return identity_observation(
                toggle_pairs(truth, sample_flips(ones, p.probability, rng)),
                spec);
          },
          [&](const DegreeFlipParams& p) {
            std::vector<double> deg(n);
            double mean = 0.0;
            for (std::size_t v = 0; v < n; ++v) {
              deg[v] = static_cast<double>(truth.out_degree(static_cast<VertexId>(v)));
              mean += deg[v];
            }
            mean /= static_cast<double>(std::max<std::size_t>(n, 1));
            const double scale = mean > 0.0 ? p.scale / (mean * mean) : 0.0;
            return identity_observation(
                toggle_pairs(truth, sample_flips(deg, scale, rng)), spec);
          },
          [&](const VertexSubsampleParams& p) {
            const auto k = static_cast<std::size_t>(
                std::llround(p.retain_fraction * static_cast<double>(n)));
            std::vector<VertexId> perm(n);
            std::iota(perm.begin(), perm.end(), VertexId{0});
            std::vector<char> keep(n, 0);
            for (std::size_t i = 0; i < k; ++i) {
              std::uniform_int_distribution<std::size_t> pick(i, n - 1);
              std::swap(perm[i], perm[pick(rng)]);
              keep[perm[i]] = 1;
            }
            return induced_observation(truth, keep, spec);
          },
          [&](const SnowballParams& p) {
            if (p.seed_count == 0) throw ConfigError("snowball needs at least one seed vertex");
            if (p.seed_count > n) throw ConfigError("snowball seed count exceeds vertex count");
            std::vector<VertexId> perm(n);
            std::iota(perm.begin(), perm.end(), VertexId{0});
            std::vector<char> seen(n, 0);
            std::vector<VertexId> queue;
            for (std::size_t i = 0; i < p.seed_count; ++i) {
              std::uniform_int_distribution<std::size_t> pick(i, n - 1);
              std::swap(perm[i], perm[pick(rng)]);
              seen[perm[i]] = 1;
              queue.push_back(perm[i]);
            }
            std::bernoulli_distribution follow(p.follow_probability);
            for (std::size_t head = 0; head < queue.size(); ++head) {
              for (VertexId u : truth.neighbors(queue[head])) {
                if (seen[u]) continue;
                if (follow(rng)) {
                  seen[u] = 1;
                  queue.push_back(u);
                }
              }
            }
            return induced_observation(truth, seen, spec);
          },
          [&](const SimilarityConfusionParams& p) {
            const auto& features = require_features(attrs, n, p);
            SimilarityKernel local;
            if (!kernel) {
              local = build_kernel(features, p);
              kernel = &local;
            }
            std::vector<Edge> edges;
            for (const Edge& e : truth.edges()) {
              const VertexId a = kernel->draw(e.u, e.v, rng);
              const VertexId b = kernel->draw(e.v, e.u, rng);
              edges.push_back({a, b, 1.0});
            }
            return identity_observation(Graph::from_edges(n, edges), spec);
          },
      },
      spec.params);
}

ErrorEstimate estimate_impl(const Graph& truth, const VertexAttributes* attrs,
                            const CorruptionSpec& spec, std::size_t trials,
                            std::uint64_t seed, const SimilarityKernel* kernel) {
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    CorruptionSpec s = spec;
    s.seed = split_seed(seed, t);
    const double e =
        observed_error_rate(truth, apply_impl(truth, attrs, s, kernel));
    sum += e;
    sum2 += e * e;
  }
  const double k = static_cast<double>(trials);
  ErrorEstimate est;
  est.mean = sum / k;
  est.stddev = trials > 1 ? std::sqrt(std::max(0.0, (sum2 - k * est.mean * est.mean) / (k - 1.0)))
                          : 0.0;
  return est;
}

}  // namespace

std::string to_string(Mechanism m) {
  switch (m) {
    case Mechanism::EdgeDeletion: return "edge-deletion";
    case Mechanism::UniformFlip: return "uniform-flip";
    case Mechanism::DegreeFlip: return "degree-flip";
    case Mechanism::VertexSubsample: return "vertex-subsample";
    case Mechanism::Snowball: return "snowball";
    case Mechanism::SimilarityConfusion: return "similarity-confusion";
  }
  return "unknown";
}

Mechanism parse_mechanism(const std::string& name) {
  for (Mechanism m : kAllMechanisms)
    if (to_string(m) == name) return m;
  throw ConfigError("unknown corruption mechanism '" + name + "'");
}

double CorruptionSpec::scalar_parameter() const {
  return std::visit(
      overloaded{
          [](const EdgeDeletionParams& p) { return p.probability; },
          [](const UniformFlipParams& p) { return p.probability; },
          [](const DegreeFlipParams& p) { return p.scale; },
          [](const VertexSubsampleParams& p) { return p.retain_fraction; },
          [](const SnowballParams& p) { return p.follow_probability; },
          [](const SimilarityConfusionParams& p) { return p.bandwidth; },
      },
      params);
}

CorruptionSpec CorruptionSpec::with_scalar_parameter(double value) const {
  CorruptionSpec out = *this;
  std::visit(overloaded{
                 [&](EdgeDeletionParams& p) { p.probability = value; },
                 [&](UniformFlipParams& p) { p.probability = value; },
                 [&](DegreeFlipParams& p) { p.scale = value; },
                 [&](VertexSubsampleParams& p) { p.retain_fraction = value; },
                 [&](SnowballParams& p) { p.follow_probability = value; },
                 [&](SimilarityConfusionParams& p) { p.bandwidth = value; },
             },
             out.params);
  return out;
}

void CorruptionSpec::validate() const {
  std::visit(
      overloaded{
          [](const EdgeDeletionParams& p) {
            require_probability(p.probability, "deletion probability");
          },
          [](const UniformFlipParams& p) {
            require_probability(p.probability, "flip probability");
          },
          [](const DegreeFlipParams& p) {
            if (!(p.scale >= 0.0)) throw ConfigError("degree-flip scale must be >= 0");
          },
          [](const VertexSubsampleParams& p) {
            require_probability(p.retain_fraction, "retain fraction");
          },
          [](const SnowballParams& p) {
            require_probability(p.follow_probability, "follow probability");
            if (p.seed_count == 0) throw ConfigError("snowball needs at least one seed vertex");
          },
          [](const SimilarityConfusionParams& p) {
            if (!(p.bandwidth >= 0.0)) throw ConfigError("bandwidth must be >= 0");
            if (p.feature_dim == 0) throw ConfigError("feature_dim must be >= 1");
          },
      },
      params);
}

CorruptionSpec CorruptionSpec::defaults(Mechanism m, std::uint64_t seed) {
  CorruptionSpec s;
  s.seed = seed;
  switch (m) {
    case Mechanism::EdgeDeletion: s.params = EdgeDeletionParams{}; break;
    case Mechanism::UniformFlip: s.params = UniformFlipParams{}; break;
    case Mechanism::DegreeFlip: s.params = DegreeFlipParams{}; break;
    case Mechanism::VertexSubsample: s.params = VertexSubsampleParams{}; break;
    case Mechanism::Snowball: s.params = SnowballParams{}; break;
    case Mechanism::SimilarityConfusion: s.params = SimilarityConfusionParams{}; break;
  }
  return s;
}

Graph ObservedGraph::lifted() const {
  std::vector<Edge> edges = graph.edges();
  if (vertex_map.empty()) {
    if (graph.num_vertices() > true_vertex_count) {
      throw DimensionError("observation has more vertices than the truth");
    }
    return Graph::from_edges(true_vertex_count, edges, graph.directed(), graph.weighted());
  }
  for (Edge& e : edges) {
    e.u = vertex_map[e.u];
    e.v = vertex_map[e.v];
  }
  return Graph::from_edges(true_vertex_count, edges, graph.directed(),
                           graph.weighted());
}

ObservedGraph apply_corruption(const Graph& truth, const VertexAttributes* attrs,
                               const CorruptionSpec& spec) {
  return apply_impl(truth, attrs, spec, nullptr);
}

double observed_error_rate(const Graph& truth, const ObservedGraph& obs) {
  if (obs.true_vertex_count != truth.num_vertices()) {
    throw DimensionError("observation does not belong to this truth graph");
  }
  return edge_error_rate(truth, obs.lifted());
}

ErrorEstimate estimate_error(const Graph& truth, const VertexAttributes* attrs,
                             const CorruptionSpec& spec, std::size_t trials,
                             std::uint64_t seed) {
  if (trials == 0) throw ConfigError("need at least one trial");
  std::optional<SimilarityKernel> kernel;
  if (auto* p = std::get_if<SimilarityConfusionParams>(&spec.params)) {
    kernel = build_kernel(require_features(attrs, truth.num_vertices(), *p), *p);
  }
  return estimate_impl(truth, attrs, spec, trials, seed,
                       kernel ? &*kernel : nullptr);
}

CalibrationResult calibrate(const Graph& truth, Mechanism mechanism,
                            double target_error,
                            const CalibrationOptions& options,
                            const VertexAttributes* attrs) {
  if (!(target_error > 0.0 && target_error <= 1.0)) {
    throw ConfigError("calibration target must be in (0, 1]");
  }
  if (truth.num_edges() == 0) {
    throw ConfigError("calibration needs a truth graph with edges");
  }
  if (options.trials == 0) throw ConfigError("calibration needs trials >= 1");

  CorruptionSpec base = CorruptionSpec::defaults(mechanism, options.seed);
  if (auto* p = std::get_if<SnowballParams>(&base.params))
    p->seed_count = options.snowball_seeds;
  if (auto* p = std::get_if<SimilarityConfusionParams>(&base.params))
    p->feature_dim = options.feature_dim;

  std::size_t evaluations = 0;
  auto evaluate = [&](double param) {
    ++evaluations;
    CorruptionSpec s = base.with_scalar_parameter(param);
    std::optional<SimilarityKernel> kernel;
    if (auto* p = std::get_if<SimilarityConfusionParams>(&s.params)) {
      kernel = build_kernel(require_features(attrs, truth.num_vertices(), *p), *p);
    }
    return estimate_impl(truth, attrs, s, options.trials,
                         split_seed(options.seed, 0xca11b), kernel ? &*kernel : nullptr);
  };
  auto finish = [&](double param, const ErrorEstimate& est) {
    CalibrationResult r;
    r.spec = base.with_scalar_parameter(param);
    r.parameter = param;
    r.achieved_error = est.mean;
    r.ci_halfwidth =
        1.96 * est.stddev / std::sqrt(static_cast<double>(options.trials));
    r.steps = evaluations;
    return r;
  };

  if (mechanism == Mechanism::EdgeDeletion) {
    // Each deleted edge is one missing edge: E[error] = q exactly.
    const double q = target_error;
    return finish(q, evaluate(q));
  }

  // Parameter interval and whether the error grows with the parameter.
  const double n = static_cast<double>(truth.num_vertices());
  const double m = static_cast<double>(truth.num_edges());
  double lo = 0.0, hi = 1.0;
  bool increasing = true;
  switch (mechanism) {
    case Mechanism::UniformFlip:
      // E[error] = eps * N / |E| exactly; start from the closed form.
      hi = std::min(1.0, 4.0 * target_error * m / (n * (n - 1.0) / 2.0));
      break;
    case Mechanism::DegreeFlip:
      hi = 4.0 * target_error * m / (n * n / 2.0);
      break;
    case Mechanism::VertexSubsample:
    case Mechanism::Snowball:
      increasing = false;
      break;
    case Mechanism::SimilarityConfusion:
      hi = 1e-3;
      break;
    case Mechanism::EdgeDeletion:
      break;
  }

  ErrorEstimate at_lo = evaluate(lo);
  ErrorEstimate at_hi = evaluate(hi);
  const bool growable = mechanism == Mechanism::UniformFlip ||
                        mechanism == Mechanism::DegreeFlip ||
                        mechanism == Mechanism::SimilarityConfusion;
  for (int k = 0; growable && increasing && at_hi.mean < target_error && k < 60; ++k) {
    lo = hi;
    at_lo = at_hi;
    hi = mechanism == Mechanism::UniformFlip ? std::min(1.0, 2.0 * hi) : 2.0 * hi;
    at_hi = evaluate(hi);
    if (mechanism == Mechanism::UniformFlip && hi >= 1.0) break;
  }
  const double min_err = std::min(at_lo.mean, at_hi.mean);
  const double max_err = std::max(at_lo.mean, at_hi.mean);
  if (target_error < min_err - options.tolerance ||
      target_error > max_err + options.tolerance) {
    throw CalibrationError(
        to_string(mechanism) + ": target error " + std::to_string(target_error) +
            " outside achievable range [" + std::to_string(min_err) + ", " +
            std::to_string(max_err) + "]",
        min_err, max_err);
  }

  double best_param = std::abs(at_lo.mean - target_error) <
                              std::abs(at_hi.mean - target_error)
                          ? lo
                          : hi;
  ErrorEstimate best = best_param == lo ? at_lo : at_hi;
  for (std::size_t step = 0; step < options.max_steps; ++step) {
    if (std::abs(best.mean - target_error) <= options.tolerance / 4.0) break;
    const double mid = 0.5 * (lo + hi);
    const ErrorEstimate at_mid = evaluate(mid);
    if (std::abs(at_mid.mean - target_error) < std::abs(best.mean - target_error)) {
      best = at_mid;
      best_param = mid;
    }
    const bool below = at_mid.mean < target_error;
    if (below == increasing) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (std::abs(best.mean - target_error) > options.tolerance) {
    throw CalibrationError(to_string(mechanism) +
                               ": bisection did not reach the target error",
                           min_err, max_err);
  }
  return finish(best_param, best);
}

std::string spec_to_json(const CorruptionSpec& spec) {
  nlohmann::json params = std::visit(
      overloaded{
          [](const EdgeDeletionParams& p) {
            return nlohmann::json{{"probability", p.probability}};
          },
          [](const UniformFlipParams& p) {
            return nlohmann::json{{"probability", p.probability}};
          },
          [](const DegreeFlipParams& p) {
            return nlohmann::json{{"scale", p.scale}};
          },
          [](const VertexSubsampleParams& p) {
            return nlohmann::json{{"retain_fraction", p.retain_fraction}};
          },
          [](const SnowballParams& p) {
            return nlohmann::json{{"seed_count", p.seed_count},
                                  {"follow_probability", p.follow_probability}};
          },
          [](const SimilarityConfusionParams& p) {
            return nlohmann::json{{"feature_dim", p.feature_dim},
                                  {"bandwidth", p.bandwidth}};
          },
      },
      spec.params);
  nlohmann::json j{{"mechanism", to_string(spec.mechanism())},
                   {"params", params},
                   {"seed", spec.seed}};
  return j.dump();
}

CorruptionSpec spec_from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    CorruptionSpec s = CorruptionSpec::defaults(
        parse_mechanism(j.at("mechanism").get<std::string>()),
        j.value("seed", std::uint64_t{0}));
    const auto& p = j.at("params");
    std::visit(overloaded{
                   [&](EdgeDeletionParams& q) { q.probability = p.at("probability"); },
                   [&](UniformFlipParams& q) { q.probability = p.at("probability"); },
                   [&](DegreeFlipParams& q) { q.scale = p.at("scale"); },
                   [&](VertexSubsampleParams& q) {
                     q.retain_fraction = p.at("retain_fraction");
                   },
                   [&](SnowballParams& q) {
                     q.seed_count = p.value("seed_count", q.seed_count);
                     q.follow_probability = p.at("follow_probability");
                   },
                   [&](SimilarityConfusionParams& q) {
                     q.feature_dim = p.value("feature_dim", q.feature_dim);
                     q.bandwidth = p.at("bandwidth");
                   },
               },
               s.params);
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("corruption spec JSON: ") + e.what(), 0);
  }
}

std::string calibration_to_json(const CalibrationResult& r) {
  nlohmann::json j{{"mechanism", to_string(r.spec.mechanism())},
                   {"param", r.parameter},
                   {"achieved_error", r.achieved_error},
                   {"ci", {r.achieved_error - r.ci_halfwidth,
                           r.achieved_error + r.ci_halfwidth}},
                   {"evaluations", r.steps},
                   {"spec", nlohmann::json::parse(spec_to_json(r.spec))}};
  return j.dump();
}

}  // namespace spg
