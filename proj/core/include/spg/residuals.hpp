#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "spg/background_model.hpp"
#include "spg/graph.hpp"

namespace spg {

/// Symmetric linear operator interface consumed by the eigensolver.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual std::size_t size() const = 0;
  /// y = Op x. Implementations must be safe for concurrent const calls.
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
};

/// Implicit residuals operator
///   B x = sum_t w_t A_t x + sum_l c_l E_l x
/// where the A_t are sparse graphs and the E_l low-rank expectation models.
/// The usual static case is one graph with weight 1 and one model with
/// coefficient -1. E[A] is never materialized.
class ResidualsOperator final : public LinearOperator {
 public:
  explicit ResidualsOperator(std::size_t n) : n_(n) {}
  /// B = A - E[A].
  ResidualsOperator(Graph graph, LowRankExpectedModel model);

  ResidualsOperator& add_graph(Graph graph, double weight = 1.0);
  ResidualsOperator& add_graph(std::shared_ptr<const Graph> graph,
                               double weight = 1.0);
  ResidualsOperator& add_model(LowRankExpectedModel model, double coeff);
  ResidualsOperator& add_model(std::shared_ptr<const LowRankExpectedModel> model,
                               double coeff);

  std::size_t size() const override { return n_; }
  void apply(std::span<const double> x, std::span<double> y) const override;

  /// Same as apply(); returns the work actually performed, counted as
  /// adjacency entries touched plus n * k per low-rank term.
  std::uint64_t apply_counted(std::span<const double> x,
                              std::span<double> y) const;
  /// Closed-form work per apply: sum nnz(A_t) + sum n * k_l.
  std::uint64_t operation_count() const;

  /// True when every graph is undirected and every model symmetric.
  bool symmetric() const;
  /// Operator multiplied by c (all weights and coefficients scaled).
  ResidualsOperator scaled(double c) const;

  struct GraphTerm {
    std::shared_ptr<const Graph> graph;
    double weight;
  };
  struct ModelTerm {
    std::shared_ptr<const LowRankExpectedModel> model;
    double coeff;
  };
  const std::vector<GraphTerm>& graph_terms() const { return graphs_; }
  const std::vector<ModelTerm>& model_terms() const { return models_; }

 private:
  std::size_t n_;
  std::vector<GraphTerm> graphs_;
  std::vector<ModelTerm> models_;
};

/// Returns (A - E[A]) x.
std::vector<double> residuals_matvec(const ResidualsOperator& op,
                                     std::span<const double> x);

/// sum_t w_t (A_t - E[A]) for a shared model.
ResidualsOperator aggregate_residuals(const TemporalGraphSequence& seq,
                                      const LowRankExpectedModel& model,
                                      std::span<const double> weights);

/// Uniform 1/T weights.
std::vector<double> uniform_weights(std::size_t num_snapshots);

}  // namespace spg
