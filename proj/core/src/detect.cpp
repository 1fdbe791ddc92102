#include "spg/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spg {
namespace {

void require_converged(const EigenResult& e) {
  if (!e.converged) {
    throw ConvergenceError("eigenpairs did not converge; statistic rejected");
  }
  if (e.count() == 0) throw ConvergenceError("no eigenpairs available");
}

std::size_t most_concentrated(const EigenResult& e) {
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t c = 0; c < e.count(); ++c) {
    const auto col = e.vectors.col(static_cast<Eigen::Index>(c));
    const double s = concentration({col.data(), static_cast<std::size_t>(col.size())});
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return best;
}

}  // namespace

std::string to_string(StatisticKind kind) {
  return kind == StatisticKind::Lambda1 ? "lambda1" : "l1norm";
}

StatisticKind parse_statistic_kind(const std::string& name) {
  if (name == "lambda1") return StatisticKind::Lambda1;
  if (name == "l1norm") return StatisticKind::L1Norm;
  throw ConfigError("unknown statistic kind '" + name + "'");
}

double concentration(std::span<const double> v) {
  double l1 = 0.0, l2 = 0.0;
  for (double x : v) {
    l1 += std::abs(x);
    l2 += x * x;
  }
  if (l1 == 0.0) return 0.0;
  return l2 / (l1 * l1);
}

double detection_statistic(const EigenResult& e, StatisticKind kind) {
  require_converged(e);
  if (kind == StatisticKind::Lambda1) return e.values.front();
  const auto col = e.vectors.col(static_cast<Eigen::Index>(most_concentrated(e)));
  return static_cast<double>(e.dimension()) *
         concentration({col.data(), static_cast<std::size_t>(col.size())});
}

RocCurve roc_curve(std::span<const double> null_stats,
                   std::span<const double> alt_stats) {
  if (null_stats.empty() || alt_stats.empty()) {
    throw ConfigError("roc_curve needs non-empty null and alternative sets");
  }
  std::vector<double> nul(null_stats.begin(), null_stats.end());
  std::vector<double> alt(alt_stats.begin(), alt_stats.end());
  std::sort(nul.begin(), nul.end(), std::greater<>());
  std::sort(alt.begin(), alt.end(), std::greater<>());
  std::vector<double> thresholds;
  thresholds.reserve(nul.size() + alt.size());
  std::merge(nul.begin(), nul.end(), alt.begin(), alt.end(),
             std::back_inserter(thresholds), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  const double n0 = static_cast<double>(nul.size());
  const double n1 = static_cast<double>(alt.size());
  RocCurve roc;
  roc.points.push_back({HUGE_VAL, 0.0, 0.0});
  std::size_t i0 = 0, i1 = 0;
  for (double t : thresholds) {
    while (i0 < nul.size() && nul[i0] >= t) ++i0;
    while (i1 < alt.size() && alt[i1] >= t) ++i1;
    roc.points.push_back({t, i0 / n0, i1 / n1});
  }
  if (roc.points.back().pfa < 1.0 || roc.points.back().pd < 1.0) {
    roc.points.push_back({-HUGE_VAL, 1.0, 1.0});
  }
  roc.auc = trapezoid_auc(roc.points);
  return roc;
}

double trapezoid_auc(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    area += (points[k].pfa - points[k - 1].pfa) *
            (points[k].pd + points[k - 1].pd) / 2.0;
  }
  return area;
}

PfaAtPd pfa_at_pd(const RocCurve& roc, double pd_target) {
  if (!(pd_target > 0.0 && pd_target <= 1.0)) {
    throw ConfigError("pd_target must be in (0, 1]");
  }
  const auto& pts = roc.points;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (pts[k].pd < pd_target) continue;
    if (k == 0) return {pts[0].pfa, true};
    const RocPoint& a = pts[k - 1];
    const RocPoint& b = pts[k];
    const double frac = (pd_target - a.pd) / (b.pd - a.pd);
    return {a.pfa + frac * (b.pfa - a.pfa), true};
  }
  return {1.0, false};
}

std::vector<VertexId> identify_vertices(const EigenResult& e, std::size_t k) {
  require_converged(e);
  const std::size_t n = e.dimension();
  if (k > n) throw ConfigError("identify_vertices: k exceeds vertex count");
  const auto col = e.vectors.col(static_cast<Eigen::Index>(most_concentrated(e)));
  std::vector<VertexId> order(n);
  std::iota(order.begin(), order.end(), VertexId{0});
  std::stable_sort(order.begin(), order.end(), [&](VertexId a, VertexId b) {
    return std::abs(col[a]) > std::abs(col[b]);
  });
  order.resize(k);
  return order;
}

}  // namespace spg
