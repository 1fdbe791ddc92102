#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "spg/error.hpp"
#include "spg/graph.hpp"

namespace spg {

enum class Mechanism {
  EdgeDeletion,
  UniformFlip,
  DegreeFlip,
  VertexSubsample,
  Snowball,
  SimilarityConfusion,
};

inline constexpr Mechanism kAllMechanisms[] = {
    Mechanism::EdgeDeletion,    Mechanism::UniformFlip,
    Mechanism::DegreeFlip,      Mechanism::VertexSubsample,
    Mechanism::Snowball,        Mechanism::SimilarityConfusion,
};

std::string to_string(Mechanism m);
Mechanism parse_mechanism(const std::string& name);

// Each true edge removed with this probability.
struct EdgeDeletionParams {
  double probability = 0.0;
};
// Each unordered pair toggled with this probability.
struct UniformFlipParams {
  double probability = 0.0;
};
// Pair (i, j) toggled with probability min(1, scale * d_i * d_j / dbar^2).
struct DegreeFlipParams {
  double scale = 0.0;
};
// Induced subgraph on a uniform vertex subset of this fraction.
struct VertexSubsampleParams {
  double retain_fraction = 1.0;
};
// Induced subgraph on the vertices reached from seed_count random seeds when
// each link out of an observed vertex is followed with follow_probability.
struct SnowballParams {
  std::size_t seed_count = 5;
  double follow_probability = 1.0;
};
// Each edge endpoint i moves to vertex u with probability proportional to
// exp(-||z_i - z_u||^2 / bandwidth) (u = i included, the other endpoint
// excluded). Features z come from VertexAttributes.
struct SimilarityConfusionParams {
  std::size_t feature_dim = 3;
  double bandwidth = 0.05;
};

using MechanismParams =
    std::variant<EdgeDeletionParams, UniformFlipParams, DegreeFlipParams,
                 VertexSubsampleParams, SnowballParams,
                 SimilarityConfusionParams>;

struct CorruptionSpec {
  MechanismParams params;
  std::uint64_t seed = 0;

  Mechanism mechanism() const { return static_cast<Mechanism>(params.index()); }
  /// The parameter calibration searches over.
  double scalar_parameter() const;
  CorruptionSpec with_scalar_parameter(double value) const;
  /// Throws ConfigError for out-of-range parameters.
  void validate() const;

  static CorruptionSpec defaults(Mechanism m, std::uint64_t seed = 0);
};

struct ObservedGraph {
  Graph graph;  // observed-id space
  CorruptionSpec provenance;
  std::vector<VertexId> vertex_map;  // observed id -> true id, increasing; empty: identity
  std::size_t true_vertex_count = 0;

  /// The observation expressed over the true vertex set; unobserved vertices
  /// are isolated.
  Graph lifted() const;
};

/// Applies one observation-error mechanism to an undirected truth graph.
/// attrs is required for similarity confusion only.
ObservedGraph apply_corruption(const Graph& truth, const VertexAttributes* attrs,
                               const CorruptionSpec& spec);

/// Edge-error rate of an observation against the truth. For sampling
/// mechanisms truth edges touching unobserved vertices count as missing.
double observed_error_rate(const Graph& truth, const ObservedGraph& obs);

struct CalibrationOptions {
  std::size_t trials = 50;
  std::uint64_t seed = 0;
  double tolerance = 0.01;
  std::size_t max_steps = 40;
  std::size_t snowball_seeds = 5;
  std::size_t feature_dim = 3;
};

struct CalibrationResult {
  CorruptionSpec spec;
  double parameter = 0.0;
  double achieved_error = 0.0;
  double ci_halfwidth = 0.0;  // 95% normal interval on the mean
  std::size_t steps = 0;
};

class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, double min_error, double max_error)
      : Error(what), min_error_(min_error), max_error_(max_error) {}
  double min_error() const noexcept { return min_error_; }
  double max_error() const noexcept { return max_error_; }

 private:
  double min_error_, max_error_;
};

/// Monte Carlo mean edge-error of spec over `trials` seeds derived from
/// `seed`, with the sample standard deviation.
struct ErrorEstimate {
  double mean = 0.0;
  double stddev = 0.0;
};
ErrorEstimate estimate_error(const Graph& truth, const VertexAttributes* attrs,
                             const CorruptionSpec& spec, std::size_t trials,
                             std::uint64_t seed);

/// Finds the mechanism parameter whose Monte Carlo mean edge-error matches
/// target within options.tolerance (bisection with common random numbers).
/// Throws CalibrationError, carrying the achievable range, when the target
/// lies outside it.
CalibrationResult calibrate(const Graph& truth, Mechanism mechanism,
                            double target_error,
                            const CalibrationOptions& options = {},
                            const VertexAttributes* attrs = nullptr);

std::string spec_to_json(const CorruptionSpec& spec);
CorruptionSpec spec_from_json(const std::string& text);
std::string calibration_to_json(const CalibrationResult& result);

}  // namespace spg
