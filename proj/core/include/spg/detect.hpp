#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spg/eigensolver.hpp"

namespace spg {

enum class StatisticKind {
  Lambda1,  // largest residual eigenvalue
  L1Norm,   // n * max_v (||v||_2 / ||v||_1)^2 over returned eigenvectors
};

std::string to_string(StatisticKind kind);
StatisticKind parse_statistic_kind(const std::string& name);

enum class Hypothesis { Null, Alternative };

struct TrialRecord {
  Hypothesis hypothesis = Hypothesis::Null;
  double statistic = 0.0;
  std::uint64_t seed = 0;
  std::string metadata;  // free-form JSON describing the trial inputs
};

/// (||v||_2 / ||v||_1)^2 for a nonzero vector; in [1/n, 1].
double concentration(std::span<const double> v);

/// Scalar detection statistic. Throws ConvergenceError for non-converged
/// input.
double detection_statistic(const EigenResult& e, StatisticKind kind);

struct RocPoint {
  double threshold;
  double pfa;
  double pd;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) first, (1,1) last
  double auc = 0.0;
};

/// Threshold sweep over the union of statistic values; a trial is declared
/// when statistic >= threshold. AUC by the trapezoid rule (ties count half).
RocCurve roc_curve(std::span<const double> null_stats,
                   std::span<const double> alt_stats);

/// Trapezoid area under an explicit point list.
double trapezoid_auc(std::span<const RocPoint> points);

struct PfaAtPd {
  double pfa = 1.0;
  bool reachable = false;
};

/// Smallest false-alarm probability achieving detection >= pd_target,
/// linearly interpolated between ROC points.
PfaAtPd pfa_at_pd(const RocCurve& roc, double pd_target);

/// The k vertices with the largest magnitude in the returned eigenvector with
/// the highest concentration, ordered by decreasing magnitude.
std::vector<VertexId> identify_vertices(const EigenResult& e, std::size_t k);

}  // namespace spg
