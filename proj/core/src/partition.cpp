#include "spg/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "spg/error.hpp"
#include "spg/rng.hpp"

namespace spg {
namespace {

void check_process_count(std::size_t n, std::size_t p) {
  if (p == 0) throw ConfigError("process count must be >= 1");
  if (p > n) {
    throw ConfigError("process count " + std::to_string(p) + " exceeds vertex count " +
                      std::to_string(n));
  }
}

// Neighbor counts per row and column block, kept for every vertex.
class BlockCounts {
 public:
  BlockCounts(const Graph& g, const ProcessGrid& grid)
      : g_(g), grid_(grid),
        rows_(g.num_vertices() * grid.rows, 0),
        cols_(g.num_vertices() * grid.cols, 0) {}

  std::uint32_t& row(VertexId v, std::size_t r) { return rows_[v * grid_.rows + r]; }
  std::uint32_t& col(VertexId v, std::size_t c) { return cols_[v * grid_.cols + c]; }

  void place(VertexId x, std::uint32_t h, int sign) {
    const std::size_t r = h / grid_.cols, c = h % grid_.cols;
    for (VertexId u : g_.neighbors(x)) {
      row(u, r) += sign;
      col(u, c) += sign;
    }
  }

  // Terms of x's own net for home h.
  std::int64_t own(VertexId x, std::uint32_t h) {
    const std::size_t r = h / grid_.cols, c = h % grid_.cols;
    std::int64_t t = 0;
    for (std::size_t b = 0; b < grid_.rows; ++b) t += b != r && row(x, b) > 0;
    for (std::size_t b = 0; b < grid_.cols; ++b) t += b != c && col(x, b) > 0;
    return t;
  }

 private:
  const Graph& g_;
  ProcessGrid grid_;
  std::vector<std::uint32_t> rows_;
  std::vector<std::uint32_t> cols_;
};

// Change in the neighbor's net when one of its neighbors leaves block `from`
// (if assigned) and joins block `to`.
std::int64_t neighbor_delta(std::uint32_t count_from, std::uint32_t count_to,
                            std::size_t from, std::size_t to, std::size_t own,
                            bool leaving) {
  if (leaving && from == to) return 0;
  std::int64_t d = 0;
  if (leaving && from != own && count_from == 1) d -= 1;
  if (to != own && count_to == 0) d += 1;
  return d;
}

}  // namespace

ProcessGrid ProcessGrid::for_processes(std::size_t p) {
  if (p == 0) throw ConfigError("process count must be >= 1");
  std::size_t r = static_cast<std::size_t>(std::sqrt(static_cast<double>(p)));
  while (r * r > p) --r;
  while ((r + 1) * (r + 1) <= p) ++r;
  while (p % r != 0) --r;
  return {r, p / r};
}

std::vector<std::size_t> Partition2D::block_sizes() const {
  std::vector<std::size_t> s(num_processes(), 0);
  for (auto h : home) ++s[h];
  return s;
}

Partition2D Partition2D::from_homes(std::vector<std::uint32_t> home, std::size_t p) {
  Partition2D part;
  part.grid = ProcessGrid::for_processes(p);
  part.row_block.resize(home.size());
  part.col_block.resize(home.size());
  for (std::size_t v = 0; v < home.size(); ++v) {
    if (home[v] >= p) throw DimensionError("home block out of range");
    part.row_block[v] = static_cast<std::uint32_t>(home[v] / part.grid.cols);
    part.col_block[v] = static_cast<std::uint32_t>(home[v] % part.grid.cols);
  }
  part.home = std::move(home);
  return part;
}

void count_process_nnz(const Graph& g, Partition2D& part) {
  if (part.num_vertices() != g.num_vertices()) {
    throw DimensionError("partition does not cover the graph");
  }
  part.process_nnz.assign(part.num_processes(), 0);
  for (VertexId u = 0; u < g.num_vertices(); ++u)
    for (VertexId v : g.neighbors(u)) ++part.process_nnz[part.owner(u, v)];
}

Partition2D random_partition(std::size_t n, std::size_t p, std::uint64_t seed) {
  check_process_count(n, p);
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(p - 1));
  std::vector<std::uint32_t> home(n);
  for (auto& h : home) h = pick(rng);
  Partition2D part = Partition2D::from_homes(std::move(home), p);
  part.work = n;
  return part;
}

Partition2D random_partition(const Graph& g, std::size_t p, std::uint64_t seed) {
  Partition2D part = random_partition(g.num_vertices(), p, seed);
  count_process_nnz(g, part);
  return part;
}

Partition2D greedy_hypergraph_partition(const Graph& g, std::size_t p,
                                        std::uint64_t seed,
                                        const GreedyOptions& options) {
  const std::size_t n = g.num_vertices();
  check_process_count(n, p);
  if (g.directed()) throw ConfigError("greedy partitioning needs an undirected graph");
  const ProcessGrid grid = ProcessGrid::for_processes(p);
  const auto capacity = static_cast<std::size_t>(
      std::ceil((1.0 + options.imbalance) * static_cast<double>(n) /
                static_cast<double>(p) - 1e-9));
  // Adjacency entries per home block, so that process loads stay even on
  // skewed degree distributions. Soft: a vertex that fits nowhere goes to
  // the block with the most room.
  const double nnz_capacity = (1.0 + options.imbalance) *
                              static_cast<double>(g.nnz()) / static_cast<double>(p);

  std::vector<VertexId> order(n);
  std::iota(order.begin(), order.end(), VertexId{0});
  Rng rng = make_rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  constexpr std::uint32_t kUnassigned = ~std::uint32_t{0};
  std::vector<std::uint32_t> home(n, kUnassigned);
  std::vector<std::size_t> load(p, 0);
  std::vector<double> nnz_load(p, 0.0);
  auto fits = [&](VertexId x, std::uint32_t h) {
    return load[h] < capacity &&
           nnz_load[h] + static_cast<double>(g.out_degree(x)) <= nnz_capacity;
  };
  BlockCounts counts(g, grid);
  std::uint64_t work = 0;

  // Volume change when x moves from `from` (kUnassigned for a fresh
  // vertex) to `to`.
  auto move_delta = [&](VertexId x, std::uint32_t from, std::uint32_t to) {
    work += g.out_degree(x) + grid.rows + grid.cols;
    std::int64_t d = counts.own(x, to) - (from == kUnassigned ? 0 : counts.own(x, from));
    const bool leaving = from != kUnassigned;
    const std::size_t rf = leaving ? from / grid.cols : 0, cf = leaving ? from % grid.cols : 0;
    const std::size_t rt = to / grid.cols, ct = to % grid.cols;
    for (VertexId u : g.neighbors(x)) {
      if (home[u] == kUnassigned) continue;
      const std::size_t ru = home[u] / grid.cols, cu = home[u] % grid.cols;
      d += neighbor_delta(leaving ? counts.row(u, rf) : 0, counts.row(u, rt), rf, rt, ru,
                          leaving);
      d += neighbor_delta(leaving ? counts.col(u, cf) : 0, counts.col(u, ct), cf, ct, cu,
                          leaving);
    }
    return d;
  };

  for (VertexId x : order) {
    std::uint32_t best = kUnassigned;
    std::int64_t best_delta = 0;
    for (std::uint32_t h = 0; h < p; ++h) {
      if (!fits(x, h)) continue;
      const std::int64_t d = move_delta(x, kUnassigned, h);
      if (best == kUnassigned || d < best_delta ||
          (d == best_delta && nnz_load[h] < nnz_load[best])) {
        best = h;
        best_delta = d;
      }
    }
    if (best == kUnassigned) {
      for (std::uint32_t h = 0; h < p; ++h) {
        if (load[h] >= capacity) continue;
        if (best == kUnassigned || nnz_load[h] < nnz_load[best]) best = h;
      }
    }
    home[x] = best;
    ++load[best];
    nnz_load[best] += static_cast<double>(g.out_degree(x));
    counts.place(x, best, +1);
  }

  for (std::size_t pass = 0; pass < options.refine_passes; ++pass) {
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t moves = 0;
    for (VertexId x : order) {
      const std::uint32_t from = home[x];
      std::uint32_t best = from;
      std::int64_t best_delta = 0;
      for (std::uint32_t h = 0; h < p; ++h) {
        if (h == from || !fits(x, h)) continue;
        const std::int64_t d = move_delta(x, from, h);
        if (d < best_delta) {
          best = h;
          best_delta = d;
        }
      }
      if (best == from) continue;
      counts.place(x, from, -1);
      counts.place(x, best, +1);
      --load[from];
      ++load[best];
      nnz_load[from] -= static_cast<double>(g.out_degree(x));
      nnz_load[best] += static_cast<double>(g.out_degree(x));
      home[x] = best;
      ++moves;
    }
    if (moves == 0) break;
  }

  Partition2D part = Partition2D::from_homes(std::move(home), p);
  part.work = work;
  count_process_nnz(g, part);
  return part;
}

CommunicationProfile communication_profile(const Graph& g, const Partition2D& part) {
  if (part.num_vertices() != g.num_vertices()) {
    throw DimensionError("partition does not cover the graph");
  }
  CommunicationProfile prof;
  prof.local_nnz.assign(part.num_processes(), 0);
  prof.volume.assign(part.num_processes(), 0);
  std::vector<std::size_t> row_seen(part.grid.rows, ~std::size_t{0});
  std::vector<std::size_t> col_seen(part.grid.cols, ~std::size_t{0});
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    std::uint64_t t = 0;
    row_seen[part.row_block[v]] = v;
    col_seen[part.col_block[v]] = v;
    for (VertexId u : g.neighbors(v)) {
      ++prof.local_nnz[part.owner(v, u)];
      if (row_seen[part.row_block[u]] != v) {
        row_seen[part.row_block[u]] = v;
        ++t;
      }
      if (col_seen[part.col_block[u]] != v) {
        col_seen[part.col_block[u]] = v;
        ++t;
      }
    }
    prof.volume[part.home[v]] += t;
    prof.total_volume += t;
  }
  return prof;
}

std::uint64_t communication_volume(const Graph& g, const Partition2D& part) {
  return communication_profile(g, part).total_volume;
}

void CostModel::validate() const {
  if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("cost model constants must be positive");
}

double matvec_cost(const CostModel& cm, const CommunicationProfile& profile) {
  cm.validate();
  double worst = 0.0;
  for (std::size_t i = 0; i < profile.local_nnz.size(); ++i) {
    worst = std::max(worst, cm.a * static_cast<double>(profile.local_nnz[i]) +
                                cm.b * static_cast<double>(profile.volume[i]));
  }
  return worst;
}

bool amortized(std::uint64_t n, double t_mv_random, double t_mv_hg,
               double t_part_random, double t_part_hg) {
  const double nn = static_cast<double>(n);
  const double lhs = t_part_hg + nn * t_mv_hg;
  const double rhs = t_part_random + nn * t_mv_random;
  return lhs <= rhs + 1e-12 * std::max(std::abs(lhs), std::abs(rhs));
}

Crossover amortization_crossover(double t_mv_random, double t_mv_hg,
                                 double t_part_random, double t_part_hg) {
  if (amortized(1, t_mv_random, t_mv_hg, t_part_random, t_part_hg)) return {1, false};
  const double saving = t_mv_random - t_mv_hg;
  if (!(saving > 0.0)) return {0, true};
  const double ratio = (t_part_hg - t_part_random) / saving;
  if (!std::isfinite(ratio) || ratio > 9.0e18) return {0, true};
  auto n = static_cast<std::uint64_t>(std::max(1.0, std::ceil(ratio)));
  while (n > 1 && amortized(n - 1, t_mv_random, t_mv_hg, t_part_random, t_part_hg)) --n;
  while (!amortized(n, t_mv_random, t_mv_hg, t_part_random, t_part_hg)) ++n;
  return {n, false};
}

Crossover amortization_crossover(const CostModel& cm,
                                 const CommunicationProfile& random,
                                 const CommunicationProfile& hg,
                                 double t_part_random, double t_part_hg) {
  return amortization_crossover(matvec_cost(cm, random), matvec_cost(cm, hg),
                                t_part_random, t_part_hg);
}

StreamPartitionResult partial_stream_partition(std::span<const Edge> stream,
                                               std::size_t n, double fraction,
                                               std::size_t p, std::uint64_t seed,
                                               const GreedyOptions& options) {
  if (stream.empty()) throw ConfigError("empty edge stream");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("stream fraction must lie in (0, 1]");
  }
  const std::size_t m = stream.size();
  auto prefix_graph = [&](std::size_t k) {
    return Graph::from_edges(n, stream.subspan(0, k));
  };

  StreamPartitionResult out;
  out.prefix_edges = std::min<std::size_t>(
      m, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(m) - 1e-9)));
  out.partition = greedy_hypergraph_partition(prefix_graph(out.prefix_edges), p, seed, options);
  out.random = random_partition(n, p, split_seed(seed, 1));
  for (int k = 1; k <= 10; ++k) {
    const std::size_t edges = (m * static_cast<std::size_t>(k) + 9) / 10;
    const Graph g = prefix_graph(edges);
    out.trace.push_back({edges, communication_volume(g, out.partition),
                         communication_volume(g, out.random)});
  }
  const Graph full = prefix_graph(m);
  count_process_nnz(full, out.partition);
  count_process_nnz(full, out.random);
  return out;
}

}  // namespace spg
