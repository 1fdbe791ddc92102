#include "spg/residuals.hpp"

#include <algorithm>

#include "spg/error.hpp"

namespace spg {

ResidualsOperator::ResidualsOperator(Graph graph, LowRankExpectedModel model)
    : n_(graph.num_vertices()) {
  add_graph(std::move(graph), 1.0);
  add_model(std::move(model), -1.0);
}

ResidualsOperator& ResidualsOperator::add_graph(Graph graph, double weight) {
  return add_graph(std::make_shared<const Graph>(std::move(graph)), weight);
}

ResidualsOperator& ResidualsOperator::add_graph(
    std::shared_ptr<const Graph> graph, double weight) {
  if (graph->num_vertices() != n_) {
    throw DimensionError("graph has " + std::to_string(graph->num_vertices()) +
                         " vertices, operator dimension is " +
                         std::to_string(n_));
  }
  graphs_.push_back({std::move(graph), weight});
  return *this;
}

ResidualsOperator& ResidualsOperator::add_model(LowRankExpectedModel model,
                                                double coeff) {
  return add_model(
      std::make_shared<const LowRankExpectedModel>(std::move(model)), coeff);
}

ResidualsOperator& ResidualsOperator::add_model(
    std::shared_ptr<const LowRankExpectedModel> model, double coeff) {
  if (model->size() != n_) {
    throw DimensionError("model has " + std::to_string(model->size()) +
                         " vertices, operator dimension is " +
                         std::to_string(n_));
  }
  models_.push_back({std::move(model), coeff});
  return *this;
}

void ResidualsOperator::apply(std::span<const double> x,
                              std::span<double> y) const {
  apply_counted(x, y);
}

std::uint64_t ResidualsOperator::apply_counted(std::span<const double> x,
                                               std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_) {
    throw DimensionError("residuals_matvec: vector length does not match operator");
  }
  std::fill(y.begin(), y.end(), 0.0);
  std::uint64_t work = 0;
  for (const auto& t : graphs_) {
    if (t.weight != 0.0) work += t.graph->multiply_add(x, y, t.weight);
  }
  for (const auto& t : models_) {
    if (t.coeff != 0.0) work += t.model->multiply_add(x, y, t.coeff);
  }
  return work;
}

std::uint64_t ResidualsOperator::operation_count() const {
  std::uint64_t work = 0;
  for (const auto& t : graphs_)
    if (t.weight != 0.0) work += t.graph->nnz();
  for (const auto& t : models_)
    if (t.coeff != 0.0) work += n_ * t.model->num_categories();
  return work;
}

bool ResidualsOperator::symmetric() const {
  return std::all_of(graphs_.begin(), graphs_.end(),
                     [](const GraphTerm& t) { return !t.graph->directed(); }) &&
         std::all_of(models_.begin(), models_.end(), [](const ModelTerm& t) {
           return t.model->is_symmetric();
         });
}

ResidualsOperator ResidualsOperator::scaled(double c) const {
  ResidualsOperator out = *this;
  for (auto& t : out.graphs_) t.weight *= c;
  for (auto& t : out.models_) t.coeff *= c;
  return out;
}

std::vector<double> residuals_matvec(const ResidualsOperator& op,
                                     std::span<const double> x) {
  std::vector<double> y(op.size());
  op.apply(x, y);
  return y;
}

ResidualsOperator aggregate_residuals(const TemporalGraphSequence& seq,
                                      const LowRankExpectedModel& model,
                                      std::span<const double> weights) {
  if (weights.size() != seq.num_snapshots()) {
    throw DimensionError("aggregate_residuals: " +
                         std::to_string(weights.size()) + " weights for " +
                         std::to_string(seq.num_snapshots()) + " snapshots");
  }
  ResidualsOperator op(seq.num_vertices());
  double total = 0.0;
  for (std::size_t t = 0; t < seq.num_snapshots(); ++t) {
    op.add_graph(seq[t], weights[t]);
    total += weights[t];
  }
  op.add_model(model, -total);
  return op;
}

std::vector<double> uniform_weights(std::size_t num_snapshots) {
  return std::vector<double>(num_snapshots,
                             1.0 / static_cast<double>(num_snapshots));
}

}  // namespace spg
