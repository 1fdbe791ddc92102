#include "spg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "spg/background_model.hpp"
#include "spg/eigensolver.hpp"
#include "spg/error.hpp"
#include "spg/fuse.hpp"
#include "spg/residuals.hpp"
#include "spg/rng.hpp"

namespace spg {
namespace {

using nlohmann::json;

// Sub-streams of a trial seed.
constexpr std::uint64_t kBackgroundStream = 1;
constexpr std::uint64_t kEmbedStream = 2;
constexpr std::uint64_t kEigenStream = 4;
constexpr std::uint64_t kSourceStream = 16;

// Sub-streams of the master seed.
constexpr std::uint64_t kCalibrationGraph = 0xca11b001;
constexpr std::uint64_t kCalibrationFeatures = 0xca11b002;
constexpr std::uint64_t kCalibrationTrials = 0xca11b003;
constexpr std::uint64_t kDynamicAttributes = 0xa771b;

std::string fmt(double d) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, p);
}

// Runs body(i) for i in [0, count) on `jobs` threads. The first failure (by
// index) is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_index = count;
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Rethrows the active exception with a replay prefix, keeping its type.
[[noreturn]] void rethrow_with_context(const std::string& prefix) {
  try {
    throw;
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(prefix + e.what());
  } catch (const CalibrationError& e) {
    throw CalibrationError(prefix + e.what(), e.min_error(), e.max_error());
  } catch (const ParseError& e) {
    throw ParseError(prefix + e.what(), 0);
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

RmatParams rmat_params(const ExperimentConfig& cfg, std::uint64_t seed) {
  RmatParams p;
  p.scale = cfg.rmat_scale;
  p.avg_degree = cfg.rmat_avg_degree;
  p.probs = cfg.rmat_probs;
  p.seed = seed;
  return p;
}

EigenOptions eigen_options(const ExperimentConfig& cfg, std::uint64_t trial) {
  EigenOptions o;
  o.count = cfg.eigen_count;
  o.tol = cfg.eigen_tol;
  o.max_iter = cfg.eigen_max_iter;
  o.seed = split_seed(trial, kEigenStream);
  o.check_symmetry = false;
  return o;
}

double analyze(const ExperimentConfig& cfg, const LinearOperator& op,
               std::uint64_t trial, std::size_t& iterations) {
  EigenOptions o = eigen_options(cfg, trial);
  o.count = std::min(o.count, op.size());
  const EigenResult e = top_eigenpairs(op, o);
  iterations = e.iterations;
  return detection_statistic(e, cfg.statistic);
}

LowRankExpectedModel fit_single_block(const Graph& g) {
  const std::vector<std::uint32_t> cats(g.num_vertices(), 0);
  return fit_moment_matching(g, cats, 1);
}

// Fixed attributes and generating model of the attributed-dynamic runs.
struct DynamicSetup {
  VertexAttributes attrs;
  LowRankExpectedModel model;
};

DynamicSetup dynamic_setup(const ExperimentConfig& cfg) {
  const std::size_t n = cfg.dynamic_vertices;
  const std::size_t k = cfg.dynamic_categories;
  DynamicSetup s;
  s.attrs = uniform_attributes(n, k, 1, split_seed(cfg.seed, kDynamicAttributes));
  // Features (1, s_i): the constant column carries the intercept.
  std::vector<double> features(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    features[2 * i] = 1.0;
    features[2 * i + 1] = s.attrs.features[i];
  }
  s.attrs.features = std::move(features);
  s.attrs.dimension = 2;

  GlmEdgeModel glm;
  glm.link = Link::Exponential;
  glm.beta_source = {0.0, cfg.dynamic_skew};
  glm.beta_target = glm.beta_source;
  glm.beta_pair.assign(k * k, 0.0);
  for (std::size_t r = 0; r < k; ++r) glm.beta_pair[r * k + r] = std::log(cfg.dynamic_contrast);
  LowRankExpectedModel raw = lowrank_from_glm(glm, s.attrs);

  const std::vector<double> ones(n, 1.0);
  double total = 0.0;
  for (double d : expected_matvec(raw, ones)) total += d;
  const double c = cfg.dynamic_avg_degree * static_cast<double>(n) / total;
  s.model = raw.scaled(c);
  return s;
}

std::vector<double> dynamic_weights(const ExperimentConfig& cfg) {
  if (!cfg.dynamic_weights.empty()) return cfg.dynamic_weights;
  return uniform_weights(cfg.dynamic_profile.size());
}

TrialRow run_dynamic_trial(const ExperimentConfig& cfg, const DynamicSetup& setup,
                           const Condition& cond, Hypothesis h, std::uint64_t seed) {
  std::vector<Graph> snaps;
  const std::uint64_t bg = split_seed(seed, kBackgroundStream);
  for (std::size_t t = 0; t < cfg.dynamic_profile.size(); ++t)
    snaps.push_back(glm_background_sample(setup.model, setup.attrs, split_seed(bg, t)));
  TemporalGraphSequence seq(std::move(snaps));
  if (h == Hypothesis::Alternative) {
    EmbeddingSpec spec;
    spec.size = cfg.dynamic_subgraph_size;
    spec.density = cfg.dynamic_peak_density;
    spec.temporal_profile = cfg.dynamic_profile;
    seq = dynamic_embed(seq, spec, split_seed(seed, kEmbedStream)).sequence;
  }
  LowRankExpectedModel fitted =
      cond.input == Condition::Input::AttributeModel
          ? fit_moment_matching(seq, setup.attrs.categories, setup.attrs.num_categories)
          : fit_moment_matching(
                seq, std::vector<std::uint32_t>(seq.num_vertices(), 0), 1);
  const std::vector<double> w = dynamic_weights(cfg);
  const ResidualsOperator op = aggregate_residuals(seq, fitted, w);
  TrialRow row;
  row.statistic = analyze(cfg, op, seed, row.iterations);
  return row;
}

Graph truth_graph(const ExperimentConfig& cfg, Hypothesis h, std::uint64_t seed) {
  Graph g = rmat_generate(rmat_params(cfg, split_seed(seed, kBackgroundStream)));
  if (h == Hypothesis::Null) return g;
  EmbeddingSpec spec;
  spec.size = cfg.subgraph_size;
  spec.density = cfg.subgraph_density;
  return embed_subgraph(g, spec, split_seed(seed, kEmbedStream)).graph;
}

ObservedGraph observe(const Graph& truth, const VertexAttributes& attrs,
                      CorruptionSpec spec, std::uint64_t seed, std::size_t source) {
  spec.seed = split_seed(seed, kSourceStream + source);
  return apply_corruption(truth, &attrs, spec);
}

VertexAttributes run_features(const ExperimentConfig& cfg) {
  return uniform_attributes(std::size_t{1} << cfg.rmat_scale, 1, cfg.feature_dim,
                            split_seed(cfg.seed, kCalibrationFeatures));
}

TrialRow run_static_trial(const ExperimentConfig& cfg, const Condition& cond,
                          Hypothesis h, std::uint64_t seed) {
  const Graph truth = truth_graph(cfg, h, seed);
  TrialRow row;
  if (cond.input == Condition::Input::Truth) {
    const ResidualsOperator op(truth, fit_single_block(truth));
    row.statistic = analyze(cfg, op, seed, row.iterations);
    return row;
  }
  const VertexAttributes attrs = run_features(cfg);
  std::vector<ObservedGraph> obs;
  double err = 0.0;
  for (std::size_t i = 0; i < cond.specs.size(); ++i) {
    obs.push_back(observe(truth, attrs, cond.specs[i], seed, i));
    err += observed_error_rate(truth, obs.back());
  }
  row.error_rate = err / static_cast<double>(obs.size());

  switch (cond.input) {
    case Condition::Input::Corrupted: {
      const Graph& g = obs.front().graph;
      if (g.num_vertices() == 0) throw ConfigError("observation retained no vertices");
      const ResidualsOperator op(g, fit_single_block(g));
      row.statistic = analyze(cfg, op, seed, row.iterations);
      break;
    }
    case Condition::Input::WeightedFusion: {
      const FusedGraph fused = weighted_sum_fusion(obs, cond.weights);
      const LowRankExpectedModel model =
          fit_single_block(fused.values).scaled(1.0 / fused.total_weight);
      const ResidualsOperator op = fused_residuals(fused, model);
      row.statistic = analyze(cfg, op, seed, row.iterations);
      break;
    }
    case Condition::Input::BayesianFusion: {
      std::vector<CorruptionSpec> specs = cond.specs;
      const LowRankExpectedModel prior = deletion_corrected_prior(obs, specs);
      const FusedGraph fused = bayesian_fusion(obs, specs, prior);
      const ResidualsOperator op = fused_residuals(fused, prior);
      row.statistic = analyze(cfg, op, seed, row.iterations);
      break;
    }
    default:
      throw ConfigError("condition " + cond.name + " does not apply to static runs");
  }
  return row;
}

Condition calibrated_condition(const ExperimentConfig& cfg, const Graph& truth,
                               const VertexAttributes& attrs, Mechanism m) {
  CalibrationOptions opt;
  opt.trials = cfg.calibration_trials;
  opt.seed = split_seed(cfg.seed, kCalibrationTrials);
  opt.snowball_seeds = cfg.snowball_seeds;
  opt.feature_dim = cfg.feature_dim;
  const CalibrationResult r = calibrate(truth, m, cfg.target_error, opt, &attrs);
  Condition c;
  c.name = to_string(m);
  c.input = Condition::Input::Corrupted;
  c.specs = {r.spec};
  c.achieved_errors = {r.achieved_error};
  return c;
}

json condition_json(const ConditionResult& r) {
  json specs = json::array();
  for (const auto& s : r.condition.specs) specs.push_back(json::parse(spec_to_json(s)));
  json j{{"name", r.condition.name},
         {"trials", {{"null", r.null_stats.size()}, {"alternative", r.alt_stats.size()}}},
         {"auc", r.roc.auc},
         {"pfa_at_80", r.pfa_at_80.pfa},
         {"pfa_at_80_reachable", r.pfa_at_80.reachable},
         {"mean_error_rate", r.mean_error_rate},
         {"specs", specs},
         {"calibrated_errors", r.condition.achieved_errors}};
  if (!r.condition.weights.empty()) j["weights"] = r.condition.weights;
  return j;
}

std::string hypothesis_name(Hypothesis h) {
  return h == Hypothesis::Null ? "null" : "alternative";
}

std::vector<Mechanism> parse_mechanisms(const std::vector<std::string>& names) {
  std::vector<Mechanism> out;
  for (const auto& n : names) out.push_back(parse_mechanism(n));
  return out;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::AttributedDynamic: return "attributed-dynamic";
    case ExperimentKind::CorruptionSweep: return "corruption-sweep";
    case ExperimentKind::Fusion: return "fusion";
    case ExperimentKind::PartitionAmortization: return "partition-amortization";
    case ExperimentKind::PartialPartition: return "partial-partition";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::AttributedDynamic, ExperimentKind::CorruptionSweep,
                 ExperimentKind::Fusion, ExperimentKind::PartitionAmortization,
                 ExperimentKind::PartialPartition}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  ExperimentConfig e;
  e.kind = kind;
  switch (kind) {
    case ExperimentKind::CorruptionSweep:
    case ExperimentKind::Fusion:
      e.statistic = StatisticKind::L1Norm;
      e.eigen_count = 10;
      e.null_trials = e.alt_trials = 500;
      break;
    case ExperimentKind::AttributedDynamic:
      e.statistic = StatisticKind::Lambda1;
      e.eigen_count = 1;
      e.null_trials = e.alt_trials = 300;
      break;
    default:
      break;
  }
  return e;
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(null_trials >= 1 && alt_trials >= 1, "trial counts must be >= 1");
  require(jobs >= 1, "jobs must be >= 1");
  require(eigen_count >= 1 && eigen_count <= 32, "eigen_count must lie in [1, 32]");
  require(eigen_tol > 0.0, "eigen_tol must be positive");
  require(target_error > 0.0 && target_error < 1.0, "target_error must lie in (0, 1)");
  require(calibration_trials >= 1, "calibration_trials must be >= 1");
  require(feature_dim >= 1, "feature_dim must be >= 1");
  rmat_params(*this, 0).validate();
  require(subgraph_size >= 1 && subgraph_size <= (std::size_t{1} << rmat_scale),
          "subgraph size must lie in [1, n]");
  require(subgraph_density >= 0.0 && subgraph_density <= 1.0,
          "subgraph density must lie in [0, 1]");
  for (const auto& m : mechanisms)
    if (m != "none") parse_mechanism(m);
  require(!fusion_sources.empty(), "fusion needs at least one source");
  for (const auto& m : fusion_sources) parse_mechanism(m);
  require(fusion_weights.empty() || fusion_weights.size() == fusion_sources.size(),
          "fusion weights must match the source count");
  require(dynamic_vertices >= dynamic_subgraph_size && dynamic_subgraph_size >= 1,
          "dynamic subgraph larger than the graph");
  require(dynamic_categories >= 1, "dynamic categories must be >= 1");
  require(dynamic_avg_degree > 0.0 && dynamic_contrast > 0.0,
          "dynamic degree and contrast must be positive");
  require(!dynamic_profile.empty(), "dynamic profile must be non-empty");
  require(dynamic_weights.empty() || dynamic_weights.size() == dynamic_profile.size(),
          "dynamic weights must match the profile length");
  require(partition_seeds >= 1, "partition seeds must be >= 1");
  require(processes >= 1, "processes must be >= 1");
  require(stream_fraction > 0.0 && stream_fraction <= 1.0,
          "stream_fraction must lie in (0, 1]");
  cost.validate();
}

ExperimentConfig ExperimentConfig::from_config(const Config& c) {
  c.require_known({"schema_version",
                   "kind",
                   "seed",
                   "null_trials",
                   "alt_trials",
                   "jobs",
                   "output_dir",
                   "detection.statistic",
                   "detection.eigen_count",
                   "detection.eigen_tol",
                   "detection.eigen_max_iter",
                   "rmat.scale",
                   "rmat.avg_degree",
                   "rmat.probs",
                   "embedding.size",
                   "embedding.density",
                   "corruption.mechanisms",
                   "corruption.target_error",
                   "corruption.calibration_trials",
                   "corruption.snowball_seeds",
                   "corruption.feature_dim",
                   "fusion.sources",
                   "fusion.weights",
                   "dynamic.vertices",
                   "dynamic.categories",
                   "dynamic.avg_degree",
                   "dynamic.skew",
                   "dynamic.contrast",
                   "dynamic.subgraph_size",
                   "dynamic.peak_density",
                   "dynamic.profile",
                   "dynamic.weights",
                   "partition.scale",
                   "partition.avg_degree",
                   "partition.processes",
                   "partition.seeds",
                   "partition.stream_fraction",
                   "partition.cost_a",
                   "partition.cost_b",
                   "partition.refine_passes"});
  if (!c.has("schema_version")) throw ConfigError("config lacks schema_version");
  if (c.get_int("schema_version", 0) != kConfigSchemaVersion) {
    throw ConfigError("unsupported config schema_version " +
                      std::to_string(c.get_int("schema_version", 0)));
  }
  if (!c.has("kind")) throw ConfigError("config lacks kind");
  ExperimentConfig e = defaults(parse_experiment_kind(c.get_string("kind", "")));
  e.seed = c.get_uint("seed", e.seed);
  e.null_trials = c.get_uint("null_trials", e.null_trials);
  e.alt_trials = c.get_uint("alt_trials", e.alt_trials);
  e.jobs = c.get_uint("jobs", e.jobs);
  e.output_dir = c.get_string("output_dir", e.output_dir.string());

  e.statistic = parse_statistic_kind(c.get_string("detection.statistic", to_string(e.statistic)));
  e.eigen_count = c.get_uint("detection.eigen_count", e.eigen_count);
  e.eigen_tol = c.get_double("detection.eigen_tol", e.eigen_tol);
  e.eigen_max_iter = c.get_uint("detection.eigen_max_iter", e.eigen_max_iter);

  e.rmat_scale = static_cast<unsigned>(c.get_uint("rmat.scale", e.rmat_scale));
  e.rmat_avg_degree = c.get_double("rmat.avg_degree", e.rmat_avg_degree);
  const auto probs = c.get_doubles("rmat.probs", {e.rmat_probs.begin(), e.rmat_probs.end()});
  if (probs.size() != 4) throw ConfigError("rmat.probs needs 4 entries");
  std::copy(probs.begin(), probs.end(), e.rmat_probs.begin());
  e.subgraph_size = c.get_uint("embedding.size", e.subgraph_size);
  e.subgraph_density = c.get_double("embedding.density", e.subgraph_density);

  e.mechanisms = c.get_strings("corruption.mechanisms", e.mechanisms);
  e.target_error = c.get_double("corruption.target_error", e.target_error);
  e.calibration_trials = c.get_uint("corruption.calibration_trials", e.calibration_trials);
  e.snowball_seeds = c.get_uint("corruption.snowball_seeds", e.snowball_seeds);
  e.feature_dim = c.get_uint("corruption.feature_dim", e.feature_dim);
  e.fusion_sources = c.get_strings("fusion.sources", e.fusion_sources);
  e.fusion_weights = c.get_doubles("fusion.weights", e.fusion_weights);

  e.dynamic_vertices = c.get_uint("dynamic.vertices", e.dynamic_vertices);
  e.dynamic_categories = c.get_uint("dynamic.categories", e.dynamic_categories);
  e.dynamic_avg_degree = c.get_double("dynamic.avg_degree", e.dynamic_avg_degree);
  e.dynamic_skew = c.get_double("dynamic.skew", e.dynamic_skew);
  e.dynamic_contrast = c.get_double("dynamic.contrast", e.dynamic_contrast);
  e.dynamic_subgraph_size = c.get_uint("dynamic.subgraph_size", e.dynamic_subgraph_size);
  e.dynamic_peak_density = c.get_double("dynamic.peak_density", e.dynamic_peak_density);
  e.dynamic_profile = c.get_doubles("dynamic.profile", e.dynamic_profile);
  e.dynamic_weights = c.get_doubles("dynamic.weights", e.dynamic_weights);

  e.partition_scale = static_cast<unsigned>(c.get_uint("partition.scale", e.partition_scale));
  e.partition_avg_degree = c.get_double("partition.avg_degree", e.partition_avg_degree);
  e.processes = c.get_uint("partition.processes", e.processes);
  e.partition_seeds = c.get_uint("partition.seeds", e.partition_seeds);
  e.stream_fraction = c.get_double("partition.stream_fraction", e.stream_fraction);
  e.cost.a = c.get_double("partition.cost_a", e.cost.a);
  e.cost.b = c.get_double("partition.cost_b", e.cost.b);
  e.refine_passes = c.get_uint("partition.refine_passes", e.refine_passes);
  e.validate();
  return e;
}

Config ExperimentConfig::to_config() const {
  Config c;
  auto integer = [](std::int64_t v) {
    ConfigValue x;
    x.kind = ConfigValue::Kind::Integer;
    x.integer = v;
    return x;
  };
  auto real = [](double v) {
    ConfigValue x;
    x.kind = ConfigValue::Kind::Real;
    x.real = v;
    return x;
  };
  auto text = [](std::string v) {
    ConfigValue x;
    x.kind = ConfigValue::Kind::String;
    x.text = std::move(v);
    return x;
  };
  auto reals = [&](std::span<const double> v) {
    ConfigValue x;
    x.kind = ConfigValue::Kind::Array;
    for (double d : v) x.items.push_back(real(d));
    return x;
  };
  auto texts = [&](const std::vector<std::string>& v) {
    ConfigValue x;
    x.kind = ConfigValue::Kind::Array;
    for (const auto& s : v) x.items.push_back(text(s));
    return x;
  };
  auto count = [&](std::size_t v) { return integer(static_cast<std::int64_t>(v)); };

  c.set("schema_version", integer(kConfigSchemaVersion));
  c.set("kind", text(to_string(kind)));
  c.set("seed", integer(static_cast<std::int64_t>(seed)));
  c.set("null_trials", count(null_trials));
  c.set("alt_trials", count(alt_trials));
  c.set("detection.statistic", text(to_string(statistic)));
  c.set("detection.eigen_count", count(eigen_count));
  c.set("detection.eigen_tol", real(eigen_tol));
  c.set("detection.eigen_max_iter", count(eigen_max_iter));
  c.set("rmat.scale", count(rmat_scale));
  c.set("rmat.avg_degree", real(rmat_avg_degree));
  c.set("rmat.probs", reals(rmat_probs));
  c.set("embedding.size", count(subgraph_size));
  c.set("embedding.density", real(subgraph_density));
  c.set("corruption.mechanisms", texts(mechanisms));
  c.set("corruption.target_error", real(target_error));
  c.set("corruption.calibration_trials", count(calibration_trials));
  c.set("corruption.snowball_seeds", count(snowball_seeds));
  c.set("corruption.feature_dim", count(feature_dim));
  c.set("fusion.sources", texts(fusion_sources));
  c.set("fusion.weights", reals(fusion_weights));
  c.set("dynamic.vertices", count(dynamic_vertices));
  c.set("dynamic.categories", count(dynamic_categories));
  c.set("dynamic.avg_degree", real(dynamic_avg_degree));
  c.set("dynamic.skew", real(dynamic_skew));
  c.set("dynamic.contrast", real(dynamic_contrast));
  c.set("dynamic.subgraph_size", count(dynamic_subgraph_size));
  c.set("dynamic.peak_density", real(dynamic_peak_density));
  c.set("dynamic.profile", reals(dynamic_profile));
  c.set("dynamic.weights", reals(dynamic_weights));
  c.set("partition.scale", count(partition_scale));
  c.set("partition.avg_degree", real(partition_avg_degree));
  c.set("partition.processes", count(processes));
  c.set("partition.seeds", count(partition_seeds));
  c.set("partition.stream_fraction", real(stream_fraction));
  c.set("partition.cost_a", real(cost.a));
  c.set("partition.cost_b", real(cost.b));
  c.set("partition.refine_passes", count(refine_passes));
  return c;
}

std::uint64_t trial_seed(std::uint64_t master, Hypothesis h, std::size_t index) {
  return split_seed(split_seed(master, h == Hypothesis::Null ? 0 : 1), index);
}

std::vector<Condition> prepare_conditions(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<Condition> out;
  switch (cfg.kind) {
    case ExperimentKind::AttributedDynamic: {
      Condition a;
      a.name = "no-attributes";
      a.input = Condition::Input::StaticModel;
      Condition b;
      b.name = "attributes";
      b.input = Condition::Input::AttributeModel;
      out = {a, b};
      break;
    }
    case ExperimentKind::CorruptionSweep:
    case ExperimentKind::Fusion: {
      const Graph truth =
          rmat_generate(rmat_params(cfg, split_seed(cfg.seed, kCalibrationGraph)));
      const VertexAttributes attrs = run_features(cfg);
      if (cfg.kind == ExperimentKind::CorruptionSweep) {
        for (const auto& name : cfg.mechanisms) {
          if (name == "none") {
            Condition c;
            c.name = "true";
            out.push_back(c);
          } else {
            out.push_back(calibrated_condition(cfg, truth, attrs, parse_mechanism(name)));
          }
        }
        break;
      }
      Condition t;
      t.name = "true";
      out.push_back(t);
      Condition weighted, bayes;
      weighted.name = "weighted-sum";
      weighted.input = Condition::Input::WeightedFusion;
      bayes.name = "bayesian";
      bayes.input = Condition::Input::BayesianFusion;
      for (Mechanism m : parse_mechanisms(cfg.fusion_sources)) {
        Condition c = calibrated_condition(cfg, truth, attrs, m);
        for (Condition* f : {&weighted, &bayes}) {
          f->specs.push_back(c.specs.front());
          f->achieved_errors.push_back(c.achieved_errors.front());
        }
        out.push_back(std::move(c));
      }
      // Single sources reuse the stream of their position in the fusion.
      for (std::size_t i = 1; i < out.size(); ++i) {
        out[i].name = "source-" + std::to_string(i - 1) + "-" + out[i].name;
      }
      weighted.weights = cfg.fusion_weights.empty()
                             ? default_fusion_weights(weighted.achieved_errors)
                             : cfg.fusion_weights;
      out.push_back(std::move(weighted));
      const bool pairwise = std::all_of(bayes.specs.begin(), bayes.specs.end(), [](const auto& s) {
        const Mechanism m = s.mechanism();
        return m == Mechanism::EdgeDeletion || m == Mechanism::UniformFlip ||
               m == Mechanism::DegreeFlip;
      });
      if (pairwise) out.push_back(std::move(bayes));
      break;
    }
    default:
      break;
  }
  return out;
}

TrialRow run_trial(const ExperimentConfig& cfg, const Condition& condition,
                   Hypothesis hypothesis, std::size_t index, std::uint64_t seed) {
  TrialRow row;
  try {
    if (cfg.kind == ExperimentKind::AttributedDynamic) {
      row = run_dynamic_trial(cfg, dynamic_setup(cfg), condition, hypothesis, seed);
    } else {
      row = run_static_trial(cfg, condition, hypothesis, seed);
    }
  } catch (const Error&) {
    rethrow_with_context("condition " + condition.name + ", " +
                         hypothesis_name(hypothesis) + " trial " +
                         std::to_string(index) + " (seed " + std::to_string(seed) +
                         "): ");
  }
  row.condition = condition.name;
  row.hypothesis = hypothesis;
  row.index = index;
  row.seed = seed;
  return row;
}

namespace {

// Source-specific single-trial runner; avoids rebuilding the dynamic setup
// per trial.
TrialRow run_prepared(const ExperimentConfig& cfg, const std::optional<DynamicSetup>& dyn,
                      const Condition& condition, Hypothesis h, std::size_t index) {
  const std::uint64_t seed = trial_seed(cfg.seed, h, index);
  TrialRow row;
  try {
    row = dyn ? run_dynamic_trial(cfg, *dyn, condition, h, seed)
              : run_static_trial(cfg, condition, h, seed);
  } catch (const Error&) {
    rethrow_with_context("condition " + condition.name + ", " + hypothesis_name(h) +
                         " trial " + std::to_string(index) + " (seed " +
                         std::to_string(seed) + "): ");
  }
  row.condition = condition.name;
  row.hypothesis = h;
  row.index = index;
  row.seed = seed;
  return row;
}

void run_detection(const ExperimentConfig& cfg, ExperimentResult& result) {
  const std::vector<Condition> conditions = prepare_conditions(cfg);
  std::optional<DynamicSetup> dyn;
  if (cfg.kind == ExperimentKind::AttributedDynamic) dyn = dynamic_setup(cfg);

  struct Job {
    std::size_t condition;
    Hypothesis h;
    std::size_t index;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < conditions.size(); ++c) {
    for (std::size_t i = 0; i < cfg.null_trials; ++i) jobs.push_back({c, Hypothesis::Null, i});
    for (std::size_t i = 0; i < cfg.alt_trials; ++i)
      jobs.push_back({c, Hypothesis::Alternative, i});
  }
  std::vector<TrialRow> rows(jobs.size());
  parallel_for(jobs.size(), cfg.jobs, [&](std::size_t j) {
    rows[j] = run_prepared(cfg, dyn, conditions[jobs[j].condition], jobs[j].h, jobs[j].index);
  });

  for (std::size_t c = 0; c < conditions.size(); ++c) {
    ConditionResult r;
    r.condition = conditions[c];
    double err = 0.0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].condition != c) continue;
      (jobs[j].h == Hypothesis::Null ? r.null_stats : r.alt_stats).push_back(rows[j].statistic);
      err += rows[j].error_rate;
    }
    r.mean_error_rate = err / static_cast<double>(r.null_stats.size() + r.alt_stats.size());
    r.roc = roc_curve(r.null_stats, r.alt_stats);
    r.pfa_at_80 = pfa_at_pd(r.roc, 0.8);
    result.conditions.push_back(std::move(r));
  }
  result.trials = std::move(rows);
}

void run_partition(const ExperimentConfig& cfg, ExperimentResult& result) {
  GreedyOptions opt;
  opt.refine_passes = cfg.refine_passes;
  std::vector<PartitionRow> rows(cfg.partition_seeds);
  parallel_for(rows.size(), cfg.jobs, [&](std::size_t s) {
    PartitionRow row;
    row.seed = trial_seed(cfg.seed, Hypothesis::Null, s);
    try {
      RmatParams rp;
      rp.scale = cfg.partition_scale;
      rp.avg_degree = cfg.partition_avg_degree;
      rp.probs = cfg.rmat_probs;
      rp.seed = split_seed(row.seed, kBackgroundStream);
      const std::vector<Edge> stream = rmat_edge_stream(rp);
      const std::size_t n = rp.num_vertices();
      const Graph g = Graph::from_edges(n, stream);
      row.edges = g.num_edges();
      Partition2D random, greedy;
      if (cfg.kind == ExperimentKind::PartialPartition) {
        StreamPartitionResult sp = partial_stream_partition(
            stream, n, cfg.stream_fraction, cfg.processes, row.seed, opt);
        row.trace = sp.trace;
        random = std::move(sp.random);
        greedy = std::move(sp.partition);
      } else {
        random = random_partition(g, cfg.processes, split_seed(row.seed, 1));
        greedy = greedy_hypergraph_partition(g, cfg.processes, row.seed, opt);
      }
      const CommunicationProfile pr = communication_profile(g, random);
      const CommunicationProfile pg = communication_profile(g, greedy);
      row.volume_random = pr.total_volume;
      row.volume_greedy = pg.total_volume;
      row.matvec_random = matvec_cost(cfg.cost, pr);
      row.matvec_greedy = matvec_cost(cfg.cost, pg);
      row.work_random = random.work;
      row.work_greedy = greedy.work;
      row.crossover = amortization_crossover(row.matvec_random, row.matvec_greedy,
                                             static_cast<double>(row.work_random),
                                             static_cast<double>(row.work_greedy));
    } catch (const Error&) {
      rethrow_with_context("partition seed " + std::to_string(s) + " (seed " +
                           std::to_string(row.seed) + "): ");
    }
    rows[s] = std::move(row);
  });
  result.partitions = std::move(rows);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  if (cfg.kind == ExperimentKind::PartitionAmortization ||
      cfg.kind == ExperimentKind::PartialPartition) {
    run_partition(cfg, result);
  } else {
    run_detection(cfg, result);
  }
  return result;
}

const ConditionResult* ExperimentResult::find(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.condition.name == name) return &c;
  return nullptr;
}

std::string ExperimentResult::summary_json() const {
  json j{{"schema_version", kSummarySchemaVersion},
         {"experiment", to_string(config.kind)},
         {"seed", config.seed}};
  if (!conditions.empty()) {
    j["statistic_kind"] = to_string(config.statistic);
    j["eigenvector_count"] = config.eigen_count;
    json conds = json::array();
    for (const auto& c : conditions) conds.push_back(condition_json(c));
    j["conditions"] = conds;
  }
  if (!partitions.empty()) {
    std::size_t greedy_wins = 0, finite = 0;
    std::vector<double> crossovers;
    json runs = json::array();
    for (const auto& r : partitions) {
      greedy_wins += r.volume_greedy < r.volume_random;
      if (!r.crossover.infinite) {
        ++finite;
        crossovers.push_back(static_cast<double>(r.crossover.matvecs));
      }
      json run{{"seed", r.seed},
               {"edges", r.edges},
               {"volume_random", r.volume_random},
               {"volume_greedy", r.volume_greedy},
               {"matvec_random", r.matvec_random},
               {"matvec_greedy", r.matvec_greedy},
               {"work_random", r.work_random},
               {"work_greedy", r.work_greedy},
               {"crossover", r.crossover.infinite ? json(nullptr) : json(r.crossover.matvecs)}};
      if (!r.trace.empty()) {
        json trace = json::array();
        for (const auto& t : r.trace)
          trace.push_back({{"edges", t.edges},
                           {"greedy", t.greedy_volume},
                           {"random", t.random_volume}});
        run["trace"] = trace;
      }
      runs.push_back(run);
    }
    std::sort(crossovers.begin(), crossovers.end());
    j["processes"] = config.processes;
    j["greedy_below_random_fraction"] =
        static_cast<double>(greedy_wins) / static_cast<double>(partitions.size());
    j["median_crossover"] = crossovers.empty()
                                ? json(nullptr)
                                : json(crossovers[crossovers.size() / 2]);
    j["finite_crossovers"] = finite;
    j["runs"] = runs;
  }
  return j.dump(2) + "\n";
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string());
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name);
    if (!out) throw ConfigError("cannot write " + (dir / name).string());
    return out;
  };

  {
    auto out = open("config.toml");
    out << result.config.to_config().to_string();
  }
  {
    auto out = open("summary.json");
    out << result.summary_json();
  }
  if (!result.trials.empty()) {
    auto out = open("records.csv");
    out << "condition,hypothesis,trial,seed,statistic,iterations,error_rate\n";
    for (const auto& r : result.trials) {
      out << r.condition << ',' << hypothesis_name(r.hypothesis) << ',' << r.index << ','
          << r.seed << ',' << fmt(r.statistic) << ',' << r.iterations << ','
          << fmt(r.error_rate) << '\n';
    }
  }
  for (const auto& c : result.conditions) {
    auto out = open("roc_" + c.condition.name + ".csv");
    out << "threshold,pfa,pd\n";
    for (const auto& p : c.roc.points)
      out << fmt(p.threshold) << ',' << fmt(p.pfa) << ',' << fmt(p.pd) << '\n';
  }
  if (!result.partitions.empty()) {
    auto out = open("partitions.csv");
    out << "seed,edges,volume_random,volume_greedy,matvec_random,matvec_greedy,"
           "work_random,work_greedy,crossover\n";
    for (const auto& r : result.partitions) {
      out << r.seed << ',' << r.edges << ',' << r.volume_random << ',' << r.volume_greedy
          << ',' << fmt(r.matvec_random) << ',' << fmt(r.matvec_greedy) << ','
          << r.work_random << ',' << r.work_greedy << ','
          << (r.crossover.infinite ? std::string("inf") : std::to_string(r.crossover.matvecs))
          << '\n';
    }
    if (!result.partitions.front().trace.empty()) {
      auto trace = open("trace.csv");
      trace << "seed,edges,greedy_volume,random_volume\n";
      for (const auto& r : result.partitions)
        for (const auto& t : r.trace)
          trace << r.seed << ',' << t.edges << ',' << t.greedy_volume << ','
                << t.random_volume << '\n';
    }
  }
}

}  // namespace spg
