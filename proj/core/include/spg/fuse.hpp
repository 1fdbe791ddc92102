#pragma once

#include <optional>
#include <span>
#include <vector>

#include "spg/background_model.hpp"
#include "spg/corrupt.hpp"
#include "spg/residuals.hpp"

namespace spg {

enum class FusionMode { WeightedSum, Bayesian };

/// Fused view of several observations of one latent graph, over the true
/// vertex set.
///
/// WeightedSum: `values` holds sum_i w_i A_i[u, v].
/// Bayesian: `values` holds the exact posterior P(edge | observations) on
/// every pair observed as an edge by at least one source; all other pairs
/// take the rank-structured `background` (prior times the all-absent
/// likelihood ratios, linearized in the flip probabilities).
struct FusedGraph {
  FusionMode mode = FusionMode::WeightedSum;
  Graph values;
  std::optional<LowRankExpectedModel> background;
  double total_weight = 1.0;

  std::size_t num_vertices() const { return values.num_vertices(); }
  /// Fused value of a pair (posterior in [0, 1] for Bayesian mode).
  double value(VertexId u, VertexId v) const;
};

/// w_i proportional to (1 - err_i), normalized to sum 1.
std::vector<double> default_fusion_weights(std::span<const double> error_rates);

/// Per-pair sum_i w_i A_i with sampling observations mapped back to true ids.
FusedGraph weighted_sum_fusion(std::span<const ObservedGraph> observations,
                               std::span<const double> weights);

/// Posterior edge probabilities from independent per-pair likelihoods. Only
/// edge-deletion, uniform-flip and degree-flip sources are accepted; degree
/// based flip probabilities use the prior's expected degrees.
FusedGraph bayesian_fusion(std::span<const ObservedGraph> observations,
                           std::span<const CorruptionSpec> specs,
                           const LowRankExpectedModel& prior);

/// Prior for bayesian_fusion() when none is known: a single-block moment fit
/// on the first edge-deletion source with omega scaled by 1 / (1 - q), or a
/// fit on the first source when there is no deletion source.
LowRankExpectedModel deletion_corrected_prior(std::span<const ObservedGraph> observations,
                                              std::span<const CorruptionSpec> specs);

/// Residuals for a fused input: F - (sum w) E[A] in weighted mode, or
/// P_post - E[A] in Bayesian mode.
ResidualsOperator fused_residuals(const FusedGraph& fused,
                                  const LowRankExpectedModel& model);

}  // namespace spg
