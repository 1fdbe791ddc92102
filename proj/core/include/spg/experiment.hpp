#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spg/config.hpp"
#include "spg/corrupt.hpp"
#include "spg/detect.hpp"
#include "spg/partition.hpp"
#include "spg/synth.hpp"

namespace spg {

inline constexpr int kSummarySchemaVersion = 1;
inline constexpr int kConfigSchemaVersion = 1;

enum class ExperimentKind {
  AttributedDynamic,
  CorruptionSweep,
  Fusion,
  PartitionAmortization,
  PartialPartition,
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

/// Everything a run needs. Defaults reproduce the reference experiments;
/// see docs/configuration.md for the file format.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::CorruptionSweep;
  std::uint64_t seed = 1;
  std::size_t null_trials = 100;
  std::size_t alt_trials = 100;
  std::size_t jobs = 1;
  std::filesystem::path output_dir;

  // detection
  StatisticKind statistic = StatisticKind::Lambda1;
  std::size_t eigen_count = 1;
  double eigen_tol = 1e-6;
  std::size_t eigen_max_iter = 0;

  // R-MAT background and static embedding
  unsigned rmat_scale = 10;
  double rmat_avg_degree = 10.0;
  std::array<double, 4> rmat_probs{0.5, 0.125, 0.125, 0.25};
  std::size_t subgraph_size = 12;
  double subgraph_density = 0.85;

  // corruption-sweep and fusion
  std::vector<std::string> mechanisms{"none",         "edge-deletion",
                                      "uniform-flip", "degree-flip",
                                      "vertex-subsample", "snowball",
                                      "similarity-confusion"};
  double target_error = 0.2;
  std::size_t calibration_trials = 50;
  std::size_t snowball_seeds = 5;
  std::size_t feature_dim = 3;
  std::vector<std::string> fusion_sources{"edge-deletion", "degree-flip"};
  std::vector<double> fusion_weights;  // empty: from calibrated error rates

  // attributed-dynamic
  std::size_t dynamic_vertices = 1024;
  std::size_t dynamic_categories = 3;
  double dynamic_avg_degree = 10.0;
  double dynamic_skew = 3.0;       // propensity exp(skew * s), s ~ U[0, 1]
  double dynamic_contrast = 20.0;  // within / across category density
  std::size_t dynamic_subgraph_size = 15;
  double dynamic_peak_density = 0.75;
  std::vector<double> dynamic_profile = default_temporal_profile();
  std::vector<double> dynamic_weights;  // empty: uniform

  // partition experiments
  unsigned partition_scale = 13;
  double partition_avg_degree = 8.0;
  std::size_t processes = 16;
  std::size_t partition_seeds = 20;
  double stream_fraction = 0.3;
  CostModel cost;
  std::size_t refine_passes = 8;

  /// Reference settings of one experiment kind: the eigenvector
  /// concentration statistic over 10 vectors for the R-MAT runs, the largest
  /// eigenvalue for the attributed-dynamic run.
  static ExperimentConfig defaults(ExperimentKind kind);

  /// Throws ConfigError on invalid settings.
  void validate() const;
  static ExperimentConfig from_config(const Config& cfg);
  Config to_config() const;
};

/// Per-trial seed: split_seed(split_seed(master, hypothesis), index). Shared
/// by every condition of a run (common random numbers).
std::uint64_t trial_seed(std::uint64_t master, Hypothesis h, std::size_t index);

/// A detection condition: how the analyzed graph is obtained from the truth.
struct Condition {
  enum class Input {
    Truth,
    Corrupted,
    WeightedFusion,
    BayesianFusion,
    StaticModel,     // attributed-dynamic without attributes
    AttributeModel,  // attributed-dynamic with the category-aware model
  };
  std::string name;
  Input input = Input::Truth;
  std::vector<CorruptionSpec> specs;       // calibrated, seeds set per trial
  std::vector<double> achieved_errors;     // calibration estimates
  std::vector<double> weights;             // fusion weights
};

struct TrialRow {
  std::string condition;
  Hypothesis hypothesis = Hypothesis::Null;
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double statistic = 0.0;
  std::size_t iterations = 0;
  double error_rate = 0.0;  // observed edge error against the truth
};

struct ConditionResult {
  Condition condition;
  std::vector<double> null_stats;
  std::vector<double> alt_stats;
  RocCurve roc;
  PfaAtPd pfa_at_80;
  double mean_error_rate = 0.0;
};

struct PartitionRow {
  std::uint64_t seed = 0;
  std::size_t edges = 0;
  std::uint64_t volume_random = 0;
  std::uint64_t volume_greedy = 0;
  double matvec_random = 0.0;
  double matvec_greedy = 0.0;
  std::uint64_t work_random = 0;
  std::uint64_t work_greedy = 0;
  Crossover crossover;
  std::vector<VolumeTracePoint> trace;  // partial-partition only
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ConditionResult> conditions;
  std::vector<TrialRow> trials;
  std::vector<PartitionRow> partitions;

  const ConditionResult* find(const std::string& name) const;
  std::string summary_json() const;
};

/// Calibrates and lists the detection conditions of a run.
std::vector<Condition> prepare_conditions(const ExperimentConfig& cfg);

/// One Monte Carlo trial; replayable from (cfg, condition, hypothesis, seed).
TrialRow run_trial(const ExperimentConfig& cfg, const Condition& condition,
                   Hypothesis hypothesis, std::size_t index, std::uint64_t seed);

/// Runs the configured pipeline. Module errors are rethrown with the trial
/// index and seed prepended.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// records.csv, roc_<condition>.csv, partitions.csv, summary.json and the
/// effective config.toml under dir.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace spg
