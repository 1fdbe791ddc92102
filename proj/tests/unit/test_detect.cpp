#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "spg/detect.hpp"
#include "spg/error.hpp"
#include "spg/synth.hpp"
#include "test_support.hpp"

using namespace spg;

namespace {

EigenResult fake_result(Eigen::MatrixXd vectors, std::vector<double> values) {
  EigenResult r;
  r.vectors = std::move(vectors);
  r.values = std::move(values);
  r.residual_norms.assign(r.values.size(), 0.0);
  r.converged = true;
  return r;
}

EigenResult solve(const Graph& g, std::size_t m, std::uint64_t seed) {
  ResidualsOperator op(g, fit_moment_matching(g, std::vector<std::uint32_t>(g.num_vertices(), 0), 1));
  EigenOptions o;
  o.count = m;
  o.seed = seed;
  return top_eigenpairs(op, o);
}

}  // namespace

TEST(Statistic, RankOneLambda) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(10);
  u[3] = 2;
  u[7] = std::sqrt(3.0);
  auto r = fake_result(u.normalized(), {u.squaredNorm()});
  EXPECT_NEAR(detection_statistic(r, StatisticKind::Lambda1), 7.0, 1e-12);
  EXPECT_EQ(identify_vertices(r, 2), (std::vector<VertexId>{3, 7}));
}

TEST(Statistic, ConcentrationExtremes) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(16, 1);
  e(5, 0) = 1.0;
  EXPECT_DOUBLE_EQ(detection_statistic(fake_result(e, {1.0}), StatisticKind::L1Norm), 16.0);
  Eigen::MatrixXd flat(16, 1);
  for (int i = 0; i < 16; ++i) flat(i, 0) = (i % 2 ? -1.0 : 1.0) / 4.0;
  EXPECT_NEAR(detection_statistic(fake_result(flat, {1.0}), StatisticKind::L1Norm), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(concentration(std::vector<double>{0, 0}), 0.0);
}

TEST(Statistic, L1NormTakesMostConcentratedVector) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(4, 2);
  v.col(0).setConstant(0.5);
  v(2, 1) = 1.0;
  auto r = fake_result(v, {3.0, 1.0});
  EXPECT_DOUBLE_EQ(detection_statistic(r, StatisticKind::L1Norm), 4.0);
  EXPECT_EQ(identify_vertices(r, 1), (std::vector<VertexId>{2}));
  EXPECT_EQ(identify_vertices(r, 4).size(), 4u);
}

TEST(Statistic, RejectsNonConverged) {
  auto r = fake_result(Eigen::MatrixXd::Identity(3, 1), {1.0});
  r.converged = false;
  EXPECT_THROW(detection_statistic(r, StatisticKind::Lambda1), ConvergenceError);
  EXPECT_THROW(identify_vertices(r, 1), ConvergenceError);
  r.converged = true;
  EXPECT_THROW(identify_vertices(r, 4), ConfigError);
}

TEST(Statistic, KindNames) {
  EXPECT_EQ(parse_statistic_kind(to_string(StatisticKind::L1Norm)), StatisticKind::L1Norm);
  EXPECT_EQ(parse_statistic_kind("lambda1"), StatisticKind::Lambda1);
  EXPECT_THROW(parse_statistic_kind("chi2"), ConfigError);
}

TEST(Roc, Examples) {
  EXPECT_DOUBLE_EQ(roc_curve(std::vector<double>{0, 0, 0}, std::vector<double>{1, 1, 1}).auc, 1.0);
  EXPECT_DOUBLE_EQ(roc_curve(std::vector<double>{1, 3}, std::vector<double>{2, 4}).auc, 0.75);
  EXPECT_DOUBLE_EQ(roc_curve(std::vector<double>{1, 1}, std::vector<double>{1, 1}).auc, 0.5);
  EXPECT_THROW(roc_curve(std::vector<double>{}, std::vector<double>{1}), ConfigError);
}

TEST(Roc, ChanceForIdenticalDistributions) {
  Rng rng = make_rng(3);
  std::normal_distribution<double> d;
  std::vector<double> a(500), b(500);
  for (auto& x : a) x = d(rng);
  for (auto& x : b) x = d(rng);
  const double auc = roc_curve(a, b).auc;
  // Mann-Whitney standard deviation for n0 = n1 = 500.
  const double sd = std::sqrt((500.0 + 500.0 + 1.0) / (12.0 * 500.0 * 500.0));
  EXPECT_NEAR(auc, 0.5, 3 * sd);
}

TEST(Roc, MonotoneWithEndpoints) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> d;
    std::uniform_int_distribution<int> coarse(0, 5);
    std::vector<double> a(50), b(70);
    for (auto& x : a) x = seed % 2 ? d(rng) : coarse(rng);
    for (auto& x : b) x = seed % 2 ? d(rng) + 0.5 : coarse(rng) + 1;
    RocCurve roc = roc_curve(a, b);
    EXPECT_EQ(roc.points.front().pfa, 0.0);
    EXPECT_EQ(roc.points.front().pd, 0.0);
    EXPECT_EQ(roc.points.back().pfa, 1.0);
    EXPECT_EQ(roc.points.back().pd, 1.0);
    for (std::size_t k = 1; k < roc.points.size(); ++k) {
      EXPECT_GE(roc.points[k].pfa, roc.points[k - 1].pfa);
      EXPECT_GE(roc.points[k].pd, roc.points[k - 1].pd);
    }
    EXPECT_GE(roc.auc, 0.0);
    EXPECT_LE(roc.auc, 1.0);
    // AUC equals the Mann-Whitney probability with ties counted half.
    double wins = 0;
    for (double x : a)
      for (double y : b) wins += y > x ? 1.0 : (y == x ? 0.5 : 0.0);
    EXPECT_NEAR(roc.auc, wins / (50.0 * 70.0), 1e-12);
  }
}

TEST(PfaAtPd, Examples) {
  RocCurve perfect = roc_curve(std::vector<double>{0, 0}, std::vector<double>{1, 1});
  EXPECT_DOUBLE_EQ(pfa_at_pd(perfect, 0.8).pfa, 0.0);

  RocCurve diag;
  diag.points = {{2, 0, 0}, {1, 0.5, 0.5}, {0, 1, 1}};
  EXPECT_NEAR(pfa_at_pd(diag, 0.8).pfa, 0.8, 1e-15);

  RocCurve step;
  step.points = {{2, 0, 0}, {1, 0.1, 0.9}, {0, 1, 1}};
  const PfaAtPd r = pfa_at_pd(step, 0.8);
  EXPECT_TRUE(r.reachable);
  EXPECT_NEAR(r.pfa, 0.0889, 5e-5);

  RocCurve low;
  low.points = {{1, 0, 0}, {0, 1, 0.5}};
  EXPECT_FALSE(pfa_at_pd(low, 0.8).reachable);
  EXPECT_EQ(pfa_at_pd(low, 0.8).pfa, 1.0);
  EXPECT_THROW(pfa_at_pd(step, 0.0), ConfigError);
}

// Scaling every trial's operator by c scales lambda1 by c and leaves the ROC.
TEST(Statistic, ScaleEquivariance) {
  std::vector<double> n1, a1, nc, ac;
  const double c = 2.5;
  for (std::uint64_t s = 0; s < 15; ++s) {
    for (int alt = 0; alt < 2; ++alt) {
      Graph g = spg::testing::gnp(80, 0.08, s * 2 + static_cast<std::uint64_t>(alt));
      if (alt) {
        EmbeddingSpec es;
        es.size = 8;
        es.density = 0.9;
        g = embed_subgraph(g, es, s).graph;
      }
      ResidualsOperator op(g, fit_moment_matching(g, std::vector<std::uint32_t>(80, 0), 1));
      EigenOptions o;
      o.tol = 1e-10;
      o.max_iter = 2000;
      const double l = detection_statistic(top_eigenpairs(op, o), StatisticKind::Lambda1);
      const double lc = detection_statistic(top_eigenpairs(op.scaled(c), o), StatisticKind::Lambda1);
      EXPECT_NEAR(lc, c * l, 1e-8 * c * std::abs(l));
      (alt ? a1 : n1).push_back(l);
      (alt ? ac : nc).push_back(c * l);
    }
  }
  EXPECT_DOUBLE_EQ(roc_curve(n1, a1).auc, roc_curve(nc, ac).auc);
}

TEST(Identify, PermutationEquivariant) {
  RmatParams p;
  p.scale = 8;
  p.seed = 4;
  EmbeddingSpec es;
  es.size = 10;
  es.density = 1.0;
  EmbedResult planted = embed_subgraph(rmat_generate(p), es, 2);
  const Graph& g = planted.graph;
  const std::size_t n = g.num_vertices();
  std::vector<VertexId> perm(n);
  std::iota(perm.begin(), perm.end(), VertexId{0});
  Rng rng = make_rng(17);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Edge> pe;
  for (const Edge& e : g.edges()) pe.push_back({perm[e.u], perm[e.v]});
  Graph h = Graph::from_edges(n, pe);

  auto a = identify_vertices(solve(g, 3, 1), 10);
  auto b = identify_vertices(solve(h, 3, 1), 10);
  std::vector<VertexId> mapped;
  for (VertexId v : a) mapped.push_back(perm[v]);
  std::sort(mapped.begin(), mapped.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(mapped, b);
}

TEST(Identify, PrecisionOnPlantedSubgraph) {
  constexpr std::size_t kSeeds = 100;
  double precision = 0;
  for (std::uint64_t s = 0; s < kSeeds; ++s) {
    RmatParams p;
    p.scale = 10;
    p.seed = split_seed(s, 1);
    EmbeddingSpec es;
    EmbedResult r = embed_subgraph(rmat_generate(p), es, split_seed(s, 2));
    auto found = identify_vertices(solve(r.graph, 10, s), 12);
    std::set<VertexId> truth(r.vertices.begin(), r.vertices.end());
    for (VertexId v : found) precision += truth.count(v);
  }
  precision /= 12.0 * kSeeds;
  RecordProperty("precision_at_12", std::to_string(precision));
  EXPECT_GE(precision, 0.5);
}

TEST(Detection, LambdaExceedsNullPercentile) {
  constexpr std::size_t kSeeds = 100;
  std::vector<double> null_l, alt_l;
  for (std::uint64_t s = 0; s < kSeeds; ++s) {
    RmatParams p;
    p.scale = 10;
    p.seed = split_seed(s, 1);
    Graph g = rmat_generate(p);
    null_l.push_back(solve(g, 1, s).values[0]);
    p.seed = split_seed(s, 3);
    EmbeddingSpec es;
    alt_l.push_back(solve(embed_subgraph(rmat_generate(p), es, split_seed(s, 2)).graph, 1, s).values[0]);
  }
  std::vector<double> sorted = null_l;
  std::sort(sorted.begin(), sorted.end());
  const double q95 = sorted[94];
  const auto hits = std::count_if(alt_l.begin(), alt_l.end(), [&](double x) { return x > q95; });
  RecordProperty("fraction_above_null_q95", std::to_string(hits / double(kSeeds)));
  EXPECT_GE(hits, 80);
}
