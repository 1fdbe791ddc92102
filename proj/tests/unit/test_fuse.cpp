#include <gtest/gtest.h>

#include <cmath>

#include "spg/error.hpp"
#include "spg/fuse.hpp"
#include "spg/synth.hpp"
#include "test_support.hpp"

using namespace spg;
using spg::testing::dense_adjacency;
using spg::testing::dense_expectation;
using spg::testing::dense_operator;

namespace {

ObservedGraph observe(const Graph& truth, Mechanism m, double param, std::uint64_t seed) {
  return apply_corruption(truth, nullptr, CorruptionSpec::defaults(m, seed).with_scalar_parameter(param));
}

ObservedGraph raw(Graph g) {
  ObservedGraph o;
  o.true_vertex_count = g.num_vertices();
  o.graph = std::move(g);
  return o;
}

LowRankExpectedModel flat_prior(std::size_t n, double p) {
  return LowRankExpectedModel::symmetric(std::vector<double>(n, 1.0),
                                         std::vector<std::uint32_t>(n, 0), 1, {p});
}

// Posterior by Bayes' rule for uniform-flip sources.
double posterior_oracle(double prior, const std::vector<bool>& seen, const std::vector<double>& eps) {
  double l1 = prior, l0 = 1 - prior;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    l1 *= seen[i] ? 1 - eps[i] : eps[i];
    l0 *= seen[i] ? eps[i] : 1 - eps[i];
  }
  return l1 / (l1 + l0);
}

}  // namespace

TEST(BayesianFusion, MatchesBayesRuleOnObservedPairs) {
  Graph truth = spg::testing::gnp(60, 0.1, 1);
  const std::vector<double> eps{0.01, 0.03, 0.05};
  std::vector<ObservedGraph> obs;
  std::vector<CorruptionSpec> specs;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    obs.push_back(observe(truth, Mechanism::UniformFlip, eps[i], i));
    specs.push_back(obs.back().provenance);
  }
  auto prior = flat_prior(60, 0.1);
  FusedGraph f = bayesian_fusion(obs, specs, prior);
  ASSERT_EQ(f.mode, FusionMode::Bayesian);
  for (VertexId u = 0; u < 60; ++u) {
    for (VertexId v = u + 1; v < 60; ++v) {
      std::vector<bool> seen;
      for (const auto& o : obs) seen.push_back(o.graph.has_edge(u, v));
      const double exact = posterior_oracle(0.1, seen, eps);
      const double got = f.value(u, v);
      EXPECT_GE(got, 0.0);
      EXPECT_LE(got, 1.0);
      EXPECT_DOUBLE_EQ(got, f.value(v, u));
      if (f.values.has_edge(u, v)) {
        EXPECT_NEAR(got, exact, 1e-12);
      } else {
        // Background: odds-linearized, accurate to first order in the prior.
        EXPECT_NEAR(got, exact, 2 * 0.1 * exact);
      }
    }
  }
}

TEST(BayesianFusion, MonotoneInObservations) {
  const std::size_t n = 4;
  auto prior = flat_prior(n, 0.2);
  std::vector<Graph> sources{Graph(n), Graph::from_edges(n, std::vector<Edge>{{0, 1}})};
  double prev = -1.0;
  for (int seen = 0; seen <= 3; ++seen) {
    std::vector<ObservedGraph> obs;
    std::vector<CorruptionSpec> specs;
    for (int i = 0; i < 3; ++i) {
      obs.push_back(raw(sources[i < seen ? 1 : 0]));
      specs.push_back(CorruptionSpec::defaults(Mechanism::UniformFlip).with_scalar_parameter(0.1));
    }
    // Keep the pair in the explicit set so every step uses the exact posterior.
    obs.push_back(raw(sources[1]));
    specs.push_back(CorruptionSpec::defaults(Mechanism::UniformFlip).with_scalar_parameter(0.5));
    const double p = bayesian_fusion(obs, specs, prior).value(0, 1);
    EXPECT_GT(p, prev);
    prev = p;
  }
}

TEST(BayesianFusion, UninformativeSourceReturnsPrior) {
  auto prior = spg::testing::random_model(30, 2, 3);
  Graph g = spg::testing::gnp(30, 0.2, 4);
  std::vector<ObservedGraph> obs{raw(g)};
  std::vector<CorruptionSpec> specs{CorruptionSpec::defaults(Mechanism::UniformFlip).with_scalar_parameter(0.5)};
  FusedGraph f = bayesian_fusion(obs, specs, prior);
  for (VertexId u = 0; u < 30; ++u)
    for (VertexId v = u + 1; v < 30; ++v)
      EXPECT_NEAR(f.value(u, v), std::min(1.0, prior.probability(u, v)), 1e-12);
}

TEST(BayesianFusion, NoiselessSourceIsTheTruth) {
  Graph g = spg::testing::gnp(40, 0.15, 5);
  auto prior = flat_prior(40, 0.15);
  for (Mechanism m : {Mechanism::EdgeDeletion, Mechanism::UniformFlip}) {
    std::vector<ObservedGraph> obs{observe(g, m, 0.0, 1)};
    std::vector<CorruptionSpec> specs{obs[0].provenance};
    FusedGraph f = bayesian_fusion(obs, specs, prior);
    for (VertexId u = 0; u < 40; ++u)
      for (VertexId v = u + 1; v < 40; ++v)
        EXPECT_EQ(f.value(u, v), g.has_edge(u, v) ? 1.0 : 0.0);
  }
}

TEST(BayesianFusion, MoreSourcesReducePosteriorError) {
  Graph truth = spg::testing::gnp(100, 0.08, 6);
  auto prior = flat_prior(100, 0.08);
  auto error_with = [&](std::size_t k) {
    std::vector<ObservedGraph> obs;
    std::vector<CorruptionSpec> specs;
    for (std::size_t i = 0; i < k; ++i) {
      obs.push_back(observe(truth, Mechanism::UniformFlip, 0.05, 100 + i));
      specs.push_back(obs.back().provenance);
    }
    FusedGraph f = bayesian_fusion(obs, specs, prior);
    double err = 0;
    for (VertexId u = 0; u < 100; ++u)
      for (VertexId v = u + 1; v < 100; ++v) err += std::abs(f.value(u, v) - (truth.has_edge(u, v) ? 1.0 : 0.0));
    return err;
  };
  double prev = error_with(1);
  for (std::size_t k : {2, 4, 8}) {
    const double e = error_with(k);
    EXPECT_LT(e, prev) << k;
    prev = e;
  }
}

TEST(BayesianFusion, DegreeFlipUsesExpectedDegrees) {
  Graph truth = spg::testing::gnp(50, 0.1, 7);
  auto prior = spg::testing::random_model(50, 1, 8);
  std::vector<ObservedGraph> obs{observe(truth, Mechanism::DegreeFlip, 0.02, 1)};
  std::vector<CorruptionSpec> specs{obs[0].provenance};
  FusedGraph f = bayesian_fusion(obs, specs, prior);
  const std::vector<double> ones(50, 1.0);
  const auto d = expected_matvec(prior, ones);
  double dbar = 0;
  for (double x : d) dbar += x / 50.0;
  for (const Edge& e : f.values.edges()) {
    const double eps = std::min(1.0, 0.02 * d[e.u] * d[e.v] / (dbar * dbar));
    EXPECT_NEAR(e.weight, posterior_oracle(prior.probability(e.u, e.v), {true}, {eps}), 1e-12);
  }
}

TEST(BayesianFusion, RejectsSamplingSources) {
  Graph g = spg::testing::gnp(30, 0.2, 9);
  auto prior = flat_prior(30, 0.2);
  for (Mechanism m : {Mechanism::Snowball, Mechanism::VertexSubsample, Mechanism::SimilarityConfusion}) {
    std::vector<ObservedGraph> obs{raw(g)};
    std::vector<CorruptionSpec> specs{CorruptionSpec::defaults(m)};
    EXPECT_THROW(bayesian_fusion(obs, specs, prior), ConfigError) << to_string(m);
  }
  std::vector<ObservedGraph> obs{raw(g), raw(g)};
  std::vector<CorruptionSpec> one{CorruptionSpec::defaults(Mechanism::EdgeDeletion)};
  EXPECT_THROW(bayesian_fusion(obs, one, prior), DimensionError);
  std::vector<ObservedGraph> small{raw(Graph(10))};
  EXPECT_THROW(bayesian_fusion(small, one, prior), DimensionError);
}

TEST(WeightedFusion, SingleSourceIsIdentity) {
  Graph g = spg::testing::gnp(40, 0.1, 10);
  std::vector<ObservedGraph> obs{raw(g)};
  std::vector<double> w{1.0};
  FusedGraph f = weighted_sum_fusion(obs, w);
  EXPECT_EQ(dense_adjacency(f.values), dense_adjacency(g));
  EXPECT_EQ(f.total_weight, 1.0);
}

TEST(WeightedFusion, IdenticalSourcesAverage) {
  Graph g = spg::testing::gnp(40, 0.1, 11);
  std::vector<ObservedGraph> obs{raw(g), raw(g)};
  std::vector<double> w{0.5, 0.5};
  EXPECT_EQ(dense_adjacency(weighted_sum_fusion(obs, w).values), dense_adjacency(g));
}

TEST(WeightedFusion, LinearAndPermutationInvariant) {
  Graph truth = spg::testing::gnp(50, 0.1, 12);
  std::vector<ObservedGraph> obs{observe(truth, Mechanism::EdgeDeletion, 0.3, 1),
                                 observe(truth, Mechanism::UniformFlip, 0.02, 2),
                                 observe(truth, Mechanism::VertexSubsample, 0.7, 3)};
  std::vector<double> w{0.2, 0.5, 0.3};
  const Eigen::MatrixXd f = dense_adjacency(weighted_sum_fusion(obs, w).values);
  Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(50, 50);
  for (std::size_t i = 0; i < 3; ++i) oracle += w[i] * dense_adjacency(obs[i].lifted());
  EXPECT_LT((f - oracle).cwiseAbs().maxCoeff(), 1e-14);

  std::vector<ObservedGraph> rev{obs[2], obs[1], obs[0]};
  std::vector<double> wr{0.3, 0.5, 0.2};
  EXPECT_LT((dense_adjacency(weighted_sum_fusion(rev, wr).values) - f).cwiseAbs().maxCoeff(), 1e-14);

  std::vector<double> w3{0.6, 1.5, 0.9};
  FusedGraph f3 = weighted_sum_fusion(obs, w3);
  EXPECT_LT((dense_adjacency(f3.values) - 3.0 * f).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_DOUBLE_EQ(f3.total_weight, 3.0);
}

TEST(WeightedFusion, Errors) {
  std::vector<ObservedGraph> obs{raw(Graph(5))};
  std::vector<double> w{0.5, 0.5};
  EXPECT_THROW(weighted_sum_fusion(obs, w), DimensionError);
  EXPECT_THROW(weighted_sum_fusion(std::vector<ObservedGraph>{}, std::vector<double>{}), ConfigError);
  std::vector<ObservedGraph> mixed{raw(Graph(5)), raw(Graph(6))};
  EXPECT_THROW(weighted_sum_fusion(mixed, w), DimensionError);
}

TEST(FusionWeights, Defaults) {
  auto w = default_fusion_weights(std::vector<double>{0.2, 0.6});
  EXPECT_NEAR(w[0], 0.8 / 1.2, 1e-15);
  EXPECT_NEAR(w[1], 0.4 / 1.2, 1e-15);
  EXPECT_THROW(default_fusion_weights(std::vector<double>{1.0, 1.0}), ConfigError);
}

TEST(FusedResiduals, MatchDenseOracle) {
  Graph truth = spg::testing::gnp(40, 0.15, 13);
  auto model = spg::testing::random_model(40, 2, 14);
  std::vector<ObservedGraph> obs{observe(truth, Mechanism::EdgeDeletion, 0.2, 1),
                                 observe(truth, Mechanism::UniformFlip, 0.02, 2)};
  std::vector<double> w{0.6, 0.4};
  FusedGraph ws = weighted_sum_fusion(obs, w);
  Eigen::MatrixXd oracle = dense_adjacency(ws.values) - dense_expectation(model);
  EXPECT_LT((dense_operator(fused_residuals(ws, model)) - oracle).cwiseAbs().maxCoeff(), 1e-12);

  std::vector<CorruptionSpec> specs{obs[0].provenance, obs[1].provenance};
  FusedGraph bf = bayesian_fusion(obs, specs, model);
  Eigen::MatrixXd post(40, 40);
  for (VertexId u = 0; u < 40; ++u)
    for (VertexId v = 0; v < 40; ++v)
      post(u, v) = u == v ? bf.background->probability(u, u) : bf.value(u, v);
  oracle = post - dense_expectation(model);
  EXPECT_LT((dense_operator(fused_residuals(bf, model)) - oracle).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(fused_residuals(bf, spg::testing::random_model(41, 1, 1)), DimensionError);
}

TEST(FusionPrior, DeletionCorrectedMass) {
  Graph truth = spg::testing::gnp(200, 0.05, 15);
  std::vector<ObservedGraph> obs{observe(truth, Mechanism::UniformFlip, 0.001, 1),
                                 observe(truth, Mechanism::EdgeDeletion, 0.25, 2)};
  std::vector<CorruptionSpec> specs{obs[0].provenance, obs[1].provenance};
  auto prior = deletion_corrected_prior(obs, specs);
  const std::vector<double> ones(200, 1.0);
  double mass = 0;
  for (double x : expected_matvec(prior, ones)) mass += x;
  // Full row sums include the self term the operator leaves out.
  for (std::size_t i = 0; i < 200; ++i)
    mass += prior.source()[i] * prior.target()[i] * prior.omega(0, 0);
  EXPECT_NEAR(mass, 2.0 * static_cast<double>(obs[1].graph.num_edges()) / 0.75, 1e-6 * mass);
}
