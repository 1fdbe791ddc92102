// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "spg/background_model.hpp"
#include "spg/corrupt.hpp"
#include "spg/detect.hpp"
#include "spg/eigensolver.hpp"
#include "spg/experiment.hpp"
#include "spg/fuse.hpp"
#include "spg/partition.hpp"
#include "spg/synth.hpp"
#include "test_support.hpp"

using namespace spg;
namespace fs = std::filesystem;

namespace {

// C1
constexpr std::size_t kOracleInstances = 50;
constexpr std::size_t kOracleMaxN = 64;
constexpr std::size_t kOracleCount = 4;
constexpr double kOracleValueTol = 1e-8;
constexpr double kOracleAngleTol = 1e-6;
constexpr double kOracleSeconds = 10.0;
// C2
constexpr std::size_t kMomentGraphs = 100;
constexpr std::size_t kMomentMaxN = 512;
constexpr double kMomentTol = 1e-9;
constexpr double kMomentSeconds = 30.0;
// C3
constexpr std::size_t kSweepTrials = 500;
constexpr double kUniformSlack = 0.02;
constexpr double kSweepSeconds = 30.0 * 60.0;
// C4
constexpr std::size_t kFusionTrials = 500;
constexpr double kFusionPfaRatio = 0.1;
constexpr double kBayesSlack = 0.02;
constexpr double kTargetPd = 0.8;
// C5
constexpr std::size_t kDynamicTrials = 300;
constexpr double kAttributeAuc = 0.95;
constexpr double kAttributeGain = 0.2;
// C6
constexpr std::size_t kPartitionSeeds = 20;
constexpr double kGreedyWinFraction = 0.95;
constexpr double kPartialWinFraction = 0.90;
constexpr double kStreamFraction = 0.3;
constexpr std::uint64_t kCrossover = 40000;
// C7
constexpr double kCalibrationTarget = 0.2;
constexpr double kCalibrationLow = 0.18;
constexpr double kCalibrationHigh = 0.22;
constexpr std::size_t kCalibrationSeeds = 100;

constexpr std::uint64_t kMasterSeed = 20240611;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t worker_count() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

ExperimentResult run_and_save(ExperimentConfig cfg, const std::string& name) {
  cfg.jobs = worker_count();
  ExperimentResult r = run_experiment(cfg);
  write_outputs(r, fs::path("acceptance_results") / name);
  return r;
}

double auc_of(const ExperimentResult& r, const std::string& name) {
  const ConditionResult* c = r.find(name);
  if (!c) throw Error("missing condition " + name);
  return c->roc.auc;
}

Outcome oracle_eigensolver() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(split_seed(kMasterSeed, 1));
  std::uniform_int_distribution<std::size_t> size(16, kOracleMaxN), blocks(1, 3);
  std::uniform_real_distribution<double> density(0.05, 0.3);
  double worst_value = 0.0, worst_angle = 0.0;
  std::size_t failures = 0;
  for (std::size_t t = 0; t < kOracleInstances; ++t) {
    const std::size_t n = size(rng);
    Graph g = spg::testing::gnp(n, density(rng), rng());
    ResidualsOperator op(g, spg::testing::random_model(n, blocks(rng), rng()));
    EigenOptions o;
    o.count = kOracleCount;
    o.tol = 1e-12;
    o.max_iter = 4000;
    o.seed = t;
    const EigenResult r = top_eigenpairs(op, o);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spg::testing::dense_operator(op));
    bool ok = r.converged;
    for (std::size_t i = 0; i < kOracleCount; ++i) {
      const auto col = static_cast<Eigen::Index>(n - 1 - i);
      const double ref = es.eigenvalues()[col];
      const double rel = std::abs(r.values[i] - ref) / std::abs(ref);
      const double cosine = std::min(
          1.0, std::abs(r.vectors.col(static_cast<Eigen::Index>(i)).dot(es.eigenvectors().col(col))));
      const double angle = std::acos(cosine);
      worst_value = std::max(worst_value, rel);
      worst_angle = std::max(worst_angle, angle);
      ok = ok && rel <= kOracleValueTol && angle <= kOracleAngleTol;
    }
    failures += !ok;
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < kOracleSeconds,
          std::to_string(kOracleInstances - failures) + "/" + std::to_string(kOracleInstances) +
              " instances; worst eigenvalue rel err " + fmt("%.2e", worst_value) +
              ", worst angle " + fmt("%.2e", worst_angle) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome moment_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = make_rng(split_seed(kMasterSeed, 2));
  std::uniform_int_distribution<unsigned> scale(5, 9);
  std::uniform_int_distribution<std::uint32_t> blocks(1, 4);
  double worst = 0.0;
  for (std::size_t t = 0; t < kMomentGraphs; ++t) {
    Graph g;
    if (t % 2) {
      RmatParams p;
      p.scale = scale(rng);
      p.seed = rng();
      g = rmat_generate(p);
    } else {
      std::uniform_int_distribution<std::size_t> n(32, kMomentMaxN);
      g = spg::testing::gnp(n(rng), 0.02, rng());
    }
    const std::uint32_t k = blocks(rng);
    std::uniform_int_distribution<std::uint32_t> cat(0, k - 1);
    std::vector<std::uint32_t> cats(g.num_vertices());
    for (auto& c : cats) c = cat(rng);
    const LowRankExpectedModel m = fit_moment_matching(g, cats, k);
    const std::vector<double> ones(g.num_vertices(), 1.0);
    const std::vector<double> off_diagonal = expected_matvec(m, ones);
    for (VertexId i = 0; i < g.num_vertices(); ++i) {
      const double row = off_diagonal[i] + m.source()[i] * m.target()[i] * m.omega(cats[i], cats[i]);
      worst = std::max(worst, std::abs(row - static_cast<double>(g.out_degree(i))));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= kMomentTol && secs < kMomentSeconds,
          std::to_string(kMomentGraphs) + " graphs; worst |sum_j p_ij - d_i| " + fmt("%.2e", worst) +
              ", " + fmt("%.2f", secs) + " s"};
}

Outcome corruption_ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = ExperimentConfig::defaults(ExperimentKind::CorruptionSweep);
  cfg.seed = split_seed(kMasterSeed, 3);
  cfg.null_trials = cfg.alt_trials = kSweepTrials;
  cfg.target_error = kCalibrationTarget;
  const ExperimentResult r = run_and_save(cfg, "corruption-sweep");
  const double truth = auc_of(r, "true");
  std::string detail = "AUC true " + fmt("%.4f", truth);
  double min_auc = std::numeric_limits<double>::infinity();
  std::string argmin;
  for (Mechanism m : kAllMechanisms) {
    const double a = auc_of(r, to_string(m));
    detail += ", " + to_string(m) + " " + fmt("%.4f", a);
    if (a < min_auc) {
      min_auc = a;
      argmin = to_string(m);
    }
  }
  const double uniform = auc_of(r, "uniform-flip");
  const double degree = auc_of(r, "degree-flip");
  const double snowball = auc_of(r, "snowball");
  const bool a = uniform >= truth - kUniformSlack;
  const bool b = degree < truth;
  const bool c = snowball == min_auc;
  const double secs = seconds_since(t0);
  detail += std::string("; uniform>=true-0.02 ") + (a ? "yes" : "NO") + ", degree<true " +
            (b ? "yes" : "NO") + ", snowball lowest " + (c ? "yes" : "NO (lowest: " + argmin + ")") +
            ", " + fmt("%.0f", secs) + " s";
  return {a && b && c && secs < kSweepSeconds, detail};
}

Outcome fusion_recovery() {
  ExperimentConfig cfg = ExperimentConfig::defaults(ExperimentKind::Fusion);
  cfg.seed = split_seed(kMasterSeed, 4);
  cfg.null_trials = cfg.alt_trials = kFusionTrials;
  const ExperimentResult r = run_and_save(cfg, "fusion");
  double best_single = 1.0;
  std::string detail;
  for (const auto& c : r.conditions) {
    const double pfa = pfa_at_pd(c.roc, kTargetPd).pfa;
    detail += c.condition.name + " AUC " + fmt("%.4f", c.roc.auc) + " pfa@0.8 " + fmt("%.4f", pfa) + "; ";
    if (c.condition.name.rfind("source-", 0) == 0) best_single = std::min(best_single, pfa);
  }
  const ConditionResult* weighted = r.find("weighted-sum");
  const PfaAtPd wpfa = pfa_at_pd(weighted->roc, kTargetPd);
  const bool a = wpfa.reachable && wpfa.pfa <= kFusionPfaRatio * best_single;
  if (best_single > 0.0) {
    detail += "ratio weighted/best-single " + fmt("%.4f", wpfa.pfa / best_single);
  } else {
    detail += "ratio undefined: best single source already has pfa 0";
  }
  const double truth = auc_of(r, "true");
  const double bayes = auc_of(r, "bayesian");
  const bool b = bayes >= truth - kBayesSlack;
  detail += std::string("; weighted pfa test ") + (a ? "yes" : "NO") + ", bayesian>=true-0.02 " +
            (b ? "yes" : "NO");
  return {a && b, detail};
}

Outcome attribute_gain() {
  ExperimentConfig cfg = ExperimentConfig::defaults(ExperimentKind::AttributedDynamic);
  cfg.seed = split_seed(kMasterSeed, 5);
  cfg.null_trials = cfg.alt_trials = kDynamicTrials;
  const ExperimentResult r = run_and_save(cfg, "attributed-dynamic");
  const double with = auc_of(r, "attributes");
  const double without = auc_of(r, "no-attributes");
  return {with >= kAttributeAuc && without <= with - kAttributeGain,
          "AUC with attributes " + fmt("%.4f", with) + ", without " + fmt("%.4f", without) +
              " (" + std::to_string(cfg.dynamic_profile.size()) + " snapshots, " +
              std::to_string(cfg.dynamic_categories) + " categories)"};
}

Outcome partition_proxy() {
  ExperimentConfig full = ExperimentConfig::defaults(ExperimentKind::PartitionAmortization);
  full.seed = split_seed(kMasterSeed, 6);
  full.partition_scale = 13;
  full.partition_seeds = kPartitionSeeds;
  const ExperimentResult a = run_and_save(full, "partition-amortization");
  std::size_t wins = 0;
  for (const auto& row : a.partitions) wins += row.volume_greedy < row.volume_random;

  ExperimentConfig partial = full;
  partial.kind = ExperimentKind::PartialPartition;
  partial.stream_fraction = kStreamFraction;
  const ExperimentResult b = run_and_save(partial, "partial-partition");
  std::size_t retained = 0;
  for (const auto& row : b.partitions)
    retained += row.trace.back().greedy_volume < row.trace.back().random_volume;

  // Documented synthetic inputs: 1000 work units more to partition, 2.5% faster matvec.
  const Crossover x = amortization_crossover(1.0, 0.975, 0.0, 1000.0);
  const double win_frac = static_cast<double>(wins) / static_cast<double>(a.partitions.size());
  const double keep_frac = static_cast<double>(retained) / static_cast<double>(b.partitions.size());
  const bool ok = win_frac >= kGreedyWinFraction && keep_frac >= kPartialWinFraction &&
                  !x.infinite && x.matvecs == kCrossover;
  return {ok, "greedy below random " + std::to_string(wins) + "/" + std::to_string(a.partitions.size()) +
                  ", partial (0.3) below random at full stream " + std::to_string(retained) + "/" +
                  std::to_string(b.partitions.size()) + ", synthetic crossover " +
                  (x.infinite ? std::string("infinite") : std::to_string(x.matvecs))};
}

Outcome calibration_accuracy() {
  const ExperimentConfig cfg = ExperimentConfig::defaults(ExperimentKind::CorruptionSweep);
  RmatParams rp;
  rp.scale = cfg.rmat_scale;
  rp.avg_degree = cfg.rmat_avg_degree;
  rp.seed = split_seed(kMasterSeed, 7);
  const Graph reference = rmat_generate(rp);
  const VertexAttributes attrs =
      uniform_attributes(reference.num_vertices(), 1, cfg.feature_dim, split_seed(kMasterSeed, 8));
  CalibrationOptions co;
  co.trials = cfg.calibration_trials;
  co.seed = split_seed(kMasterSeed, 9);
  bool ok = true;
  std::string detail;
  for (Mechanism m : kAllMechanisms) {
    const CalibrationResult cal = calibrate(reference, m, kCalibrationTarget, co, &attrs);
    // Fresh truth graph and corruption draw per seed.
    double total = 0.0;
    for (std::size_t s = 0; s < kCalibrationSeeds; ++s) {
      rp.seed = split_seed(kMasterSeed + 1, s);
      const Graph truth = rmat_generate(rp);
      CorruptionSpec spec = cal.spec;
      spec.seed = split_seed(kMasterSeed + 2, s);
      total += observed_error_rate(truth, apply_corruption(truth, &attrs, spec));
    }
    const double mean = total / static_cast<double>(kCalibrationSeeds);
    ok = ok && mean >= kCalibrationLow && mean <= kCalibrationHigh;
    detail += (detail.empty() ? "" : ", ") + to_string(m) + " " + fmt("%.4f", mean);
  }
  return {ok, "mean edge error over 100 seeds: " + detail};
}

// Compact re-check of the module invariants; the full suites run as unit tests.
Outcome property_suites() {
  std::size_t checks = 0, failed = 0;
  auto check = [&](bool ok) {
    ++checks;
    failed += !ok;
  };
  for (std::uint64_t s = 0; s < 10; ++s) {
    RmatParams p;
    p.scale = 8;
    p.seed = s;
    const Graph g = rmat_generate(p);
    check(g == rmat_generate(p));
    const auto model = fit_moment_matching(g, std::vector<std::uint32_t>(g.num_vertices(), 0), 1);
    const ResidualsOperator op(g, model);
    const auto x = spg::testing::random_vector(g.num_vertices(), s);
    const auto y = spg::testing::random_vector(g.num_vertices(), s + 100);
    std::vector<double> xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xy[i] = 2.0 * x[i] - 3.0 * y[i];
    const auto bx = residuals_matvec(op, x), by = residuals_matvec(op, y), bxy = residuals_matvec(op, xy);
    double lin = 0.0, norm = 0.0, xby = 0.0, ybx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      lin = std::max(lin, std::abs(bxy[i] - (2.0 * bx[i] - 3.0 * by[i])));
      norm = std::max(norm, std::abs(bxy[i]));
      xby += x[i] * by[i];
      ybx += y[i] * bx[i];
    }
    check(lin <= 1e-12 * std::max(1.0, norm));
    check(std::abs(xby - ybx) <= 1e-9 * std::max(1.0, std::abs(xby)));

    EigenOptions eo;
    eo.count = 3;
    eo.seed = s;
    const EigenResult e1 = top_eigenpairs(op, eo), e2 = top_eigenpairs(op, eo);
    check(e1.values == e2.values);

    for (Mechanism m : {Mechanism::VertexSubsample, Mechanism::Snowball}) {
      const auto obs = apply_corruption(g, nullptr, CorruptionSpec::defaults(m, s).with_scalar_parameter(0.5));
      bool exact = std::is_sorted(obs.vertex_map.begin(), obs.vertex_map.end());
      for (VertexId a = 0; a < obs.graph.num_vertices(); ++a)
        for (VertexId b = a + 1; b < obs.graph.num_vertices(); ++b)
          exact = exact && obs.graph.has_edge(a, b) == g.has_edge(obs.vertex_map[a], obs.vertex_map[b]);
      check(exact);
    }
    const auto del = apply_corruption(g, nullptr, CorruptionSpec::defaults(Mechanism::EdgeDeletion, s).with_scalar_parameter(0.3));
    const auto flip = apply_corruption(g, nullptr, CorruptionSpec::defaults(Mechanism::UniformFlip, s).with_scalar_parameter(0.01));
    check(del.graph == apply_corruption(g, nullptr, del.provenance).graph);
    const std::vector<ObservedGraph> obs{del, flip};
    const std::vector<CorruptionSpec> specs{del.provenance, flip.provenance};
    const FusedGraph f = bayesian_fusion(obs, specs, deletion_corrected_prior(obs, specs));
    bool bounded = true;
    for (const Edge& e : f.values.edges()) bounded = bounded && e.weight >= 0.0 && e.weight <= 1.0;
    for (VertexId u = 0; u < 50; ++u) bounded = bounded && f.value(u, u + 1) >= 0.0 && f.value(u, u + 1) <= 1.0;
    check(bounded);

    Rng rng = make_rng(s);
    std::normal_distribution<double> nd;
    std::vector<double> n0(40), n1(60);
    for (auto& v : n0) v = nd(rng);
    for (auto& v : n1) v = nd(rng) + 0.7;
    const RocCurve roc = roc_curve(n0, n1);
    bool mono = roc.points.front().pfa == 0.0 && roc.points.back().pd == 1.0;
    for (std::size_t k = 1; k < roc.points.size(); ++k)
      mono = mono && roc.points[k].pfa >= roc.points[k - 1].pfa && roc.points[k].pd >= roc.points[k - 1].pd;
    check(mono);
  }
  return {failed == 0, std::to_string(checks - failed) + "/" + std::to_string(checks) +
                           " invariant checks (linearity, symmetry, determinism, induced subgraphs, "
                           "posterior bounds, ROC monotonicity); full suites run under ctest label 'unit'"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"oracle eigensolver equivalence", oracle_eigensolver},
      {"moment-matching exactness", moment_exactness},
      {"corruption mechanism ordering", corruption_ordering},
      {"fusion recovery", fusion_recovery},
      {"attribute gain on dynamic graphs", attribute_gain},
      {"partition communication proxy", partition_proxy},
      {"calibration accuracy", calibration_accuracy},
      {"property suites", property_suites},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %d %s: %s | %s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
