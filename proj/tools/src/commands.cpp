#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "spg/background_model.hpp"
#include "spg/config.hpp"
#include "spg/corrupt.hpp"
#include "spg/detect.hpp"
#include "spg/eigensolver.hpp"
#include "spg/error.hpp"
#include "spg/experiment.hpp"
#include "spg/fuse.hpp"
#include "spg/graph_io.hpp"
#include "spg/partition.hpp"
#include "spg/residuals.hpp"
#include "spg/rng.hpp"
#include "spg/synth.hpp"

namespace spg::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

GraphFormat format_for(const fs::path& p) {
  return p.extension() == ".mtx" ? GraphFormat::MatrixMarket : GraphFormat::EdgeList;
}

Graph read_graph(const fs::path& p) { return load_graph(p, format_for(p)); }

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << text;
}

std::uint64_t seed_or(const GlobalOptions& g, std::uint64_t fallback) {
  return g.seed.value_or(fallback);
}

// "u v w" lines, one per undirected edge.
void write_weighted_edges(const Graph& g, const fs::path& p) {
  std::ostringstream out;
  out.precision(17);
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << ' ' << e.weight << '\n';
  write_text(p, out.str());
}

// Attribute categories, or a single block when no attribute file is given.
std::pair<std::vector<std::uint32_t>, std::size_t> categories_for(
    const std::string& attr_path, std::size_t n) {
  if (attr_path.empty()) return {std::vector<std::uint32_t>(n, 0), 1};
  const VertexAttributes a = load_attributes(attr_path);
  if (a.size() != n) throw DimensionError("attribute file does not match the graph");
  return {a.categories, a.num_categories};
}

// ---- synth --------------------------------------------------------------

struct SynthArgs {
  std::string generator = "rmat";
  unsigned scale = 10;
  double avg_degree = 10.0;
  std::vector<double> probs{0.5, 0.125, 0.125, 0.25};
  std::string model;
  std::string attributes;
  std::size_t embed_size = 0;
  double embed_density = 0.85;
  std::string format = "edgelist";
};

int run_synth(const GlobalOptions& g, const SynthArgs& a) {
  const std::uint64_t seed = seed_or(g, 1);
  Graph graph;
  json spec{{"generator", a.generator}};
  if (a.generator == "rmat") {
    RmatParams p;
    p.scale = a.scale;
    p.avg_degree = a.avg_degree;
    if (a.probs.size() != 4) throw ConfigError("--probs needs four values");
    std::copy(a.probs.begin(), a.probs.end(), p.probs.begin());
    p.seed = split_seed(seed, 1);
    graph = rmat_generate(p);
    spec["scale"] = p.scale;
    spec["avg_degree"] = p.avg_degree;
    spec["probs"] = a.probs;
  } else if (a.generator == "glm") {
    if (a.model.empty()) throw ConfigError("--generator glm needs --model");
    const LowRankExpectedModel model = load_model(a.model);
    if (a.attributes.empty()) {
      graph = glm_background_sample(model, nullptr, split_seed(seed, 1));
    } else {
      graph = glm_background_sample(model, load_attributes(a.attributes), split_seed(seed, 1));
    }
    spec["model"] = a.model;
  } else {
    throw ConfigError("unknown generator '" + a.generator + "'");
  }

  std::vector<VertexId> vertices;
  if (a.embed_size > 0) {
    EmbeddingSpec es;
    es.size = a.embed_size;
    es.density = a.embed_density;
    EmbedResult r = embed_subgraph(graph, es, split_seed(seed, 2));
    graph = std::move(r.graph);
    vertices = std::move(r.vertices);
    spec["embedding"] = {{"size", es.size}, {"density", es.density}};
  }

  const GraphFormat fmt = parse_graph_format(a.format);
  const fs::path graph_path =
      g.out / (fmt == GraphFormat::MatrixMarket ? "graph.mtx" : "graph.edges");
  fs::create_directories(g.out);
  save_graph(graph, graph_path, fmt);
  json truth{{"subgraph_vertices", vertices}, {"spec", spec}, {"seed", seed}};
  write_text(g.out / "truth.json", truth.dump(2) + "\n");
  std::cout << graph_path.string() << ": " << graph.num_vertices() << " vertices, "
            << graph.num_edges() << " edges\n";
  return kOk;
}

// ---- corrupt ------------------------------------------------------------

struct CorruptArgs {
  std::string graph;
  std::string attributes;
  std::string mechanism;
  std::optional<double> param;
  std::string spec;
  std::optional<double> calibrate;
  std::size_t calibration_trials = 50;
};

int run_corrupt(const GlobalOptions& g, const CorruptArgs& a) {
  const Graph truth = read_graph(a.graph);
  std::optional<VertexAttributes> attrs;
  if (!a.attributes.empty()) attrs = load_attributes(a.attributes);
  const VertexAttributes* ap = attrs ? &*attrs : nullptr;
  const std::uint64_t seed = seed_or(g, 1);
  fs::create_directories(g.out);

  CorruptionSpec spec;
  if (!a.spec.empty()) {
    spec = spec_from_json(read_text(a.spec));
    if (g.seed) spec.seed = *g.seed;
  } else {
    if (a.mechanism.empty()) throw ConfigError("give --mechanism or --spec");
    const Mechanism m = parse_mechanism(a.mechanism);
    if (a.calibrate) {
      CalibrationOptions opt;
      opt.trials = a.calibration_trials;
      opt.seed = split_seed(seed, 0xca11b);
      const CalibrationResult r = calibrate(truth, m, *a.calibrate, opt, ap);
      write_text(g.out / "calibration.json", calibration_to_json(r) + "\n");
      spec = r.spec;
    } else {
      spec = CorruptionSpec::defaults(m, seed);
      if (a.param) spec = spec.with_scalar_parameter(*a.param);
    }
    spec.seed = seed;
  }
  spec.validate();
  const ObservedGraph obs = apply_corruption(truth, ap, spec);
  // Observations are written in the true vertex space so that they can be
  // fused directly; the vertex map lists the observed vertices.
  save_graph(obs.lifted(), g.out / "observed.edges", GraphFormat::EdgeList);
  write_text(g.out / "spec.json", spec_to_json(spec) + "\n");
  if (obs.vertex_map.size() != obs.true_vertex_count) {
    std::ostringstream vm;
    vm << "observed,true\n";
    for (std::size_t i = 0; i < obs.vertex_map.size(); ++i) vm << i << ',' << obs.vertex_map[i] << '\n';
    write_text(g.out / "vertex_map.csv", vm.str());
  }
  std::cout << "edge error " << observed_error_rate(truth, obs) << "\n";
  return kOk;
}

// ---- fuse ---------------------------------------------------------------

struct FuseArgs {
  std::vector<std::string> graphs;
  std::vector<std::string> specs;
  std::string mode = "weighted";
  std::vector<double> weights;
  std::vector<double> errors;
  std::string prior;
};

int run_fuse(const GlobalOptions& g, const FuseArgs& a) {
  if (a.graphs.empty()) throw ConfigError("fuse needs at least one --graph");
  std::vector<Graph> graphs;
  std::size_t n = 0;
  for (const auto& p : a.graphs) {
    graphs.push_back(read_graph(p));
    n = std::max(n, graphs.back().num_vertices());
  }
  std::vector<CorruptionSpec> specs;
  for (const auto& p : a.specs) specs.push_back(spec_from_json(read_text(p)));
  if (!specs.empty() && specs.size() != graphs.size()) {
    throw ConfigError("give one --spec per --graph");
  }
  std::vector<ObservedGraph> obs;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    ObservedGraph o;
    o.graph = graphs[i].num_vertices() == n
                  ? graphs[i]
                  : Graph::from_edges(n, graphs[i].edges());
    o.true_vertex_count = n;
    if (!specs.empty()) o.provenance = specs[i];
    obs.push_back(std::move(o));
  }
  fs::create_directories(g.out);

  FusedGraph fused;
  if (a.mode == "weighted") {
    std::vector<double> w = a.weights;
    if (w.empty()) {
      w = a.errors.empty() ? std::vector<double>(obs.size(), 1.0 / static_cast<double>(obs.size()))
                           : default_fusion_weights(a.errors);
    }
    fused = weighted_sum_fusion(obs, w);
  } else if (a.mode == "bayesian") {
    if (specs.empty()) throw ConfigError("bayesian fusion needs --spec for every source");
    const LowRankExpectedModel prior =
        a.prior.empty() ? deletion_corrected_prior(obs, specs) : load_model(a.prior);
    fused = bayesian_fusion(obs, specs, prior);
    save_model(*fused.background, g.out / "background.json");
  } else {
    throw ConfigError("unknown fusion mode '" + a.mode + "'");
  }
  write_weighted_edges(fused.values, g.out / "fused.edges");
  std::cout << "fused " << obs.size() << " sources: " << fused.values.num_edges()
            << " weighted pairs\n";
  return kOk;
}

// ---- spectral -----------------------------------------------------------

struct SpectralArgs {
  std::string graph;
  std::string model;
  std::string attributes;
  std::size_t count = 1;
  double tol = 1e-6;
  std::size_t max_iter = 0;
  std::string vectors;
  std::string save_model;
};

int run_spectral(const GlobalOptions& g, const SpectralArgs& a) {
  const Graph graph = read_graph(a.graph);
  LowRankExpectedModel model;
  if (!a.model.empty()) {
    model = load_model(a.model);
  } else {
    auto [cats, k] = categories_for(a.attributes, graph.num_vertices());
    model = fit_moment_matching(graph, cats, k);
  }
  if (!a.save_model.empty()) save_model(model, a.save_model);
  const ResidualsOperator op(graph, model);
  EigenOptions opt;
  opt.count = a.count;
  opt.tol = a.tol;
  opt.max_iter = a.max_iter;
  opt.seed = seed_or(g, 0);
  const EigenResult r = top_eigenpairs(op, opt);
  json out{{"eigenvalues", r.values},
           {"residual_norms", r.residual_norms},
           {"converged", r.converged},
           {"iterations", r.iterations}};
  std::cout << out.dump(2) << "\n";
  if (!a.vectors.empty()) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "vertex";
    for (std::size_t j = 0; j < r.count(); ++j) csv << ",v" << j + 1;
    csv << '\n';
    for (Eigen::Index i = 0; i < r.vectors.rows(); ++i) {
      csv << i;
      for (Eigen::Index j = 0; j < r.vectors.cols(); ++j) csv << ',' << r.vectors(i, j);
      csv << '\n';
    }
    write_text(a.vectors, csv.str());
  }
  return r.converged ? kOk : kNotConverged;
}

// ---- detect -------------------------------------------------------------

struct DetectArgs {
  std::string records;
  std::string condition;
  std::string null_file;
  std::string alt_file;
  std::string statistic_kind = "lambda1";
  // single-graph mode
  std::string graph;
  std::string attributes;
  std::size_t count = 1;
  std::size_t identify = 0;
};

std::vector<double> read_numbers(const fs::path& p) {
  std::istringstream in(read_text(p));
  std::vector<double> v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    try {
      std::size_t used = 0;
      v.push_back(std::stod(line, &used));
    } catch (const std::exception&) {
      throw ParseError("not a number: '" + line + "'", line_no);
    }
  }
  return v;
}

int run_detect(const GlobalOptions& g, const DetectArgs& a) {
  if (!a.graph.empty()) {
    const Graph graph = read_graph(a.graph);
    auto [cats, k] = categories_for(a.attributes, graph.num_vertices());
    const ResidualsOperator op(graph, fit_moment_matching(graph, cats, k));
    EigenOptions opt;
    opt.count = a.count;
    opt.seed = seed_or(g, 0);
    const EigenResult r = top_eigenpairs(op, opt);
    const StatisticKind kind = parse_statistic_kind(a.statistic_kind);
    json out{{"statistic_kind", to_string(kind)},
             {"statistic", detection_statistic(r, kind)},
             {"vertices", identify_vertices(r, a.identify)}};
    std::cout << out.dump(2) << "\n";
    return kOk;
  }

  std::vector<double> null_stats, alt_stats;
  if (!a.records.empty()) {
    std::istringstream in(read_text(a.records));
    std::string line;
    std::getline(in, line);  // header
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
      if (f.size() < 5) throw ParseError("short records line", line_no);
      if (!a.condition.empty() && f[0] != a.condition) continue;
      (f[1] == "null" ? null_stats : alt_stats).push_back(std::stod(f[4]));
    }
  } else {
    if (a.null_file.empty() || a.alt_file.empty()) {
      throw ConfigError("give --records or both --null and --alt");
    }
    null_stats = read_numbers(a.null_file);
    alt_stats = read_numbers(a.alt_file);
  }
  if (null_stats.empty() || alt_stats.empty()) {
    throw ConfigError("need at least one null and one alternative statistic");
  }
  const RocCurve roc = roc_curve(null_stats, alt_stats);
  const PfaAtPd p80 = pfa_at_pd(roc, 0.8);
  std::ostringstream csv;
  csv.precision(17);
  csv << "threshold,pfa,pd\n";
  for (const auto& pt : roc.points) csv << pt.threshold << ',' << pt.pfa << ',' << pt.pd << '\n';
  write_text(g.out / "roc.csv", csv.str());
  json summary{{"auc", roc.auc},
               {"pfa_at_80", p80.pfa},
               {"pfa_at_80_reachable", p80.reachable},
               {"trials", {{"null", null_stats.size()}, {"alternative", alt_stats.size()}}},
               {"statistic_kind", a.statistic_kind}};
  write_text(g.out / "detect.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

// ---- partition ----------------------------------------------------------

struct PartitionArgs {
  std::string graph;
  unsigned scale = 13;
  double avg_degree = 8.0;
  std::size_t processes = 16;
  double fraction = 1.0;
  double cost_a = 1.0;
  double cost_b = 1.0;
};

int run_partition(const GlobalOptions& g, const PartitionArgs& a) {
  const std::uint64_t seed = seed_or(g, 1);
  std::vector<Edge> stream;
  std::size_t n = 0;
  if (!a.graph.empty()) {
    const Graph graph = read_graph(a.graph);
    n = graph.num_vertices();
    stream = graph.edges();
    Rng rng = make_rng(split_seed(seed, 3));
    std::shuffle(stream.begin(), stream.end(), rng);
  } else {
    RmatParams p;
    p.scale = a.scale;
    p.avg_degree = a.avg_degree;
    p.seed = split_seed(seed, 3);
    stream = rmat_edge_stream(p);
    n = p.num_vertices();
  }
  const Graph full = Graph::from_edges(n, stream);
  const StreamPartitionResult sp =
      partial_stream_partition(stream, n, a.fraction, a.processes, seed);
  CostModel cm{a.cost_a, a.cost_b};
  const CommunicationProfile pr = communication_profile(full, sp.random);
  const CommunicationProfile pg = communication_profile(full, sp.partition);
  const Crossover c = amortization_crossover(
      matvec_cost(cm, pr), matvec_cost(cm, pg), static_cast<double>(sp.random.work),
      static_cast<double>(sp.partition.work));
  json trace = json::array();
  for (const auto& t : sp.trace)
    trace.push_back({{"edges", t.edges}, {"greedy", t.greedy_volume}, {"random", t.random_volume}});
  json out{{"p", a.processes},
           {"grid", {sp.partition.grid.rows, sp.partition.grid.cols}},
           {"volumes", {{"random", pr.total_volume}, {"greedy", pg.total_volume}}},
           {"matvec_cost", {{"random", matvec_cost(cm, pr)}, {"greedy", matvec_cost(cm, pg)}}},
           {"crossover", c.infinite ? json(nullptr) : json(c.matvecs)},
           {"trace", trace}};
  write_text(g.out / "partition.json", out.dump(2) + "\n");
  std::ostringstream csv;
  csv << "vertex,row_block,col_block\n";
  for (std::size_t v = 0; v < n; ++v)
    csv << v << ',' << sp.partition.row_block[v] << ',' << sp.partition.col_block[v] << '\n';
  write_text(g.out / "partition.csv", csv.str());
  std::cout << out.dump(2) << "\n";
  return kOk;
}

// ---- experiment ---------------------------------------------------------

int run_experiment_cmd(const GlobalOptions& g, const std::string& config_path,
                       bool out_given, bool jobs_given) {
  ExperimentConfig cfg = ExperimentConfig::from_config(Config::load(config_path));
  if (g.seed) cfg.seed = *g.seed;
  if (jobs_given) cfg.jobs = g.jobs;
  if (out_given || cfg.output_dir.empty()) cfg.output_dir = g.out;
  const ExperimentResult r = run_experiment(cfg);
  write_outputs(r, cfg.output_dir);
  for (const auto& c : r.conditions) {
    std::cout << c.condition.name << ": auc " << c.roc.auc << ", pfa@0.8 " << c.pfa_at_80.pfa
              << "\n";
  }
  if (!r.partitions.empty()) {
    std::size_t wins = 0;
    for (const auto& p : r.partitions) wins += p.volume_greedy < p.volume_random;
    std::cout << "greedy volume below random in " << wins << "/" << r.partitions.size()
              << " runs\n";
  }
  std::cout << "wrote " << (cfg.output_dir / "summary.json").string() << "\n";
  return kOk;
}

}  // namespace

void register_commands(CLI::App& app, GlobalOptions& global, std::function<int()>& run) {
  app.add_option("--seed", global.seed, "Master seed");
  auto* jobs_opt = app.add_option("--jobs", global.jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", global.out, "Output directory");

  auto synth = std::make_shared<SynthArgs>();
  auto* s = app.add_subcommand("synth", "Generate a background graph, optionally with an embedded subgraph");
  s->fallthrough();
  s->add_option("--generator", synth->generator, "rmat or glm")->capture_default_str();
  s->add_option("--scale", synth->scale)->capture_default_str();
  s->add_option("--avg-degree", synth->avg_degree)->capture_default_str();
  s->add_option("--probs", synth->probs, "R-MAT quadrant probabilities a b c d")->expected(4);
  s->add_option("--model", synth->model, "Model JSON for --generator glm");
  s->add_option("--attributes", synth->attributes, "Attribute CSV");
  s->add_option("--embed-size", synth->embed_size, "Embedded subgraph size (0: none)");
  s->add_option("--embed-density", synth->embed_density)->capture_default_str();
  s->add_option("--format", synth->format, "edgelist or mtx")->capture_default_str();
  s->callback([&, synth] { run = [&, synth] { return run_synth(global, *synth); }; });

  auto corrupt = std::make_shared<CorruptArgs>();
  auto* c = app.add_subcommand("corrupt", "Apply an observation-noise mechanism");
  c->fallthrough();
  c->add_option("--graph", corrupt->graph)->required();
  c->add_option("--attributes", corrupt->attributes, "Feature CSV for similarity-confusion");
  c->add_option("--mechanism", corrupt->mechanism);
  c->add_option("--param", corrupt->param, "Mechanism parameter");
  c->add_option("--spec", corrupt->spec, "Spec JSON");
  c->add_option("--calibrate", corrupt->calibrate, "Target edge-error rate");
  c->add_option("--calibration-trials", corrupt->calibration_trials)->capture_default_str();
  c->callback([&, corrupt] { run = [&, corrupt] { return run_corrupt(global, *corrupt); }; });

  auto fuse = std::make_shared<FuseArgs>();
  auto* f = app.add_subcommand("fuse", "Fuse several observations of one graph");
  f->fallthrough();
  f->add_option("--graph", fuse->graphs)->required();
  f->add_option("--spec", fuse->specs);
  f->add_option("--mode", fuse->mode, "weighted or bayesian")->capture_default_str();
  f->add_option("--weights", fuse->weights);
  f->add_option("--errors", fuse->errors, "Per-source edge-error rates for default weights");
  f->add_option("--prior", fuse->prior, "Prior model JSON (bayesian)");
  f->callback([&, fuse] { run = [&, fuse] { return run_fuse(global, *fuse); }; });

  auto spectral = std::make_shared<SpectralArgs>();
  auto* sp = app.add_subcommand("spectral", "Top eigenpairs of the residuals matrix");
  sp->fallthrough();
  sp->add_option("--graph", spectral->graph)->required();
  sp->add_option("--model", spectral->model, "Model JSON (default: moment fit)");
  sp->add_option("--attributes", spectral->attributes, "Categories for the moment fit");
  sp->add_option("-k,--count", spectral->count)->capture_default_str();
  sp->add_option("--tol", spectral->tol)->capture_default_str();
  sp->add_option("--max-iter", spectral->max_iter);
  sp->add_option("--vectors", spectral->vectors, "Eigenvector CSV output");
  sp->add_option("--save-model", spectral->save_model, "Write the fitted model");
  sp->callback([&, spectral] { run = [&, spectral] { return run_spectral(global, *spectral); }; });

  auto detect = std::make_shared<DetectArgs>();
  auto* d = app.add_subcommand("detect", "ROC from trial statistics, or score one graph");
  d->fallthrough();
  d->add_option("--records", detect->records, "records.csv from an experiment");
  d->add_option("--condition", detect->condition);
  d->add_option("--null", detect->null_file, "Null statistics, one per line");
  d->add_option("--alt", detect->alt_file, "Alternative statistics, one per line");
  d->add_option("--statistic-kind", detect->statistic_kind)->capture_default_str();
  d->add_option("--graph", detect->graph, "Score a single graph");
  d->add_option("--attributes", detect->attributes);
  d->add_option("-k,--count", detect->count)->capture_default_str();
  d->add_option("--identify", detect->identify, "Report this many anomalous vertices");
  d->callback([&, detect] { run = [&, detect] { return run_detect(global, *detect); }; });

  auto part = std::make_shared<PartitionArgs>();
  auto* p = app.add_subcommand("partition", "Random vs greedy 2D partition of the matvec");
  p->fallthrough();
  p->add_option("--graph", part->graph, "Graph file (default: R-MAT)");
  p->add_option("--scale", part->scale)->capture_default_str();
  p->add_option("--avg-degree", part->avg_degree)->capture_default_str();
  p->add_option("-p,--processes", part->processes)->capture_default_str();
  p->add_option("--fraction", part->fraction, "Partition after this fraction of the edge stream")
      ->capture_default_str();
  p->add_option("--cost-a", part->cost_a)->capture_default_str();
  p->add_option("--cost-b", part->cost_b)->capture_default_str();
  p->callback([&, part] { run = [&, part] { return run_partition(global, *part); }; });

  auto config_path = std::make_shared<std::string>();
  auto* e = app.add_subcommand("experiment", "Run an experiment from a config file");
  e->fallthrough();
  e->add_option("config", *config_path)->required()->check(CLI::ExistingFile);
  e->callback([&, config_path, out_opt, jobs_opt] {
    run = [&, config_path, out_opt, jobs_opt] {
      return run_experiment_cmd(global, *config_path, out_opt->count() > 0,
                                jobs_opt->count() > 0);
    };
  });
}

}  // namespace spg::cli
