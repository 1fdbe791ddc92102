#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <vector>
#include <algorithm>

#include "spg/graph.hpp"
#include "spg/rng.hpp"

namespace spg::detail {

// Uniform in (0, 1].
inline double open_uniform(Rng& rng) {
  return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Members of one block ordered by decreasing weight.
struct WeightedBlock {
  std::vector<VertexId> ids;
  std::vector<double> weights;
};

inline WeightedBlock make_block(std::vector<VertexId> ids,
                                std::span<const double> weight_of) {
  std::stable_sort(ids.begin(), ids.end(), [&](VertexId a, VertexId b) {
    return weight_of[a] > weight_of[b];
  });
  WeightedBlock blk;
  blk.weights.reserve(ids.size());
  for (VertexId v : ids) blk.weights.push_back(weight_of[v]);
  blk.ids = std::move(ids);
  return blk;
}

// Visits every pair (a_i, b_j) independently with probability
// min(1, scale * wa_i * wb_j) in expected O(|a| + |b| + hits) time by
// geometric skipping with rejection (weights must be non-increasing). When
// same_block is set, a and b are the same list and only pairs i < j are
// considered.
template <typename Emit>
void sample_weighted_pairs(const WeightedBlock& a, const WeightedBlock& b,
                           bool same_block, double scale, Rng& rng,
                           Emit&& emit) {
  if (scale <= 0.0) return;
  const std::size_t nb = b.ids.size();
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    const double wi = a.weights[i];
    if (wi <= 0.0) break;
    std::size_t j = same_block ? i + 1 : 0;
    if (j >= nb) continue;
    double p = std::min(1.0, scale * wi * b.weights[j]);
    while (j < nb && p > 0.0) {
      if (p < 1.0) {
        const double r = open_uniform(rng);
        const double skip = std::floor(std::log(r) / std::log1p(-p));
        if (skip >= static_cast<double>(nb - j)) break;
        j += static_cast<std::size_t>(skip);
      }
      const double q = std::min(1.0, scale * wi * b.weights[j]);
      if (open_uniform(rng) <= q / p) emit(a.ids[i], b.ids[j]);
      p = q;
      ++j;
    }
  }
}

}  // namespace spg::detail
