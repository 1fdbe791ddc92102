#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spg/graph.hpp"

namespace spg {

/// pr x pc process grid. pr is the largest divisor of p not above sqrt(p),
/// so perfect squares give a square grid.
struct ProcessGrid {
  std::size_t rows = 1;
  std::size_t cols = 1;

  static ProcessGrid for_processes(std::size_t p);
  std::size_t size() const noexcept { return rows * cols; }
};

/// 2D layout of the residuals matvec derived from one vertex partition: each
/// vertex has a home process h(v) = row(v) * pc + col(v); nonzero (u, v) lives
/// on process (row(u), col(v)).
struct Partition2D {
  ProcessGrid grid;
  std::vector<std::uint32_t> home;
  std::vector<std::uint32_t> row_block;
  std::vector<std::uint32_t> col_block;
  /// Stored adjacency entries per process (row-major over the grid). Empty
  /// until computed against a graph.
  std::vector<std::size_t> process_nnz;
  /// Abstract cost of computing the partition: one unit per random draw or
  /// per adjacency entry scanned.
  std::uint64_t work = 0;

  std::size_t num_processes() const noexcept { return grid.size(); }
  std::size_t num_vertices() const noexcept { return home.size(); }
  std::size_t owner(VertexId u, VertexId v) const {
    return row_block[u] * grid.cols + col_block[v];
  }
  /// Vertices per home block.
  std::vector<std::size_t> block_sizes() const;

  static Partition2D from_homes(std::vector<std::uint32_t> home, std::size_t p);
};

/// Fills part.process_nnz for g.
void count_process_nnz(const Graph& g, Partition2D& part);

/// Independent uniform home block per vertex. Throws ConfigError if p == 0 or
/// p > n.
Partition2D random_partition(std::size_t n, std::size_t p, std::uint64_t seed);
Partition2D random_partition(const Graph& g, std::size_t p, std::uint64_t seed);

struct GreedyOptions {
  double imbalance = 0.1;          // home blocks hold at most ceil((1+imbalance) n / p)
  std::size_t refine_passes = 8;   // positive-gain move sweeps after assignment
};

/// Single-level greedy minimization of communication_volume(): vertices are
/// streamed in seed-shuffled order to the block with the smallest volume
/// increase (ties to the lighter block), then improved by vertex moves with
/// positive gain. Throws ConfigError if p == 0 or p > n.
Partition2D greedy_hypergraph_partition(const Graph& g, std::size_t p,
                                        std::uint64_t seed,
                                        const GreedyOptions& options = {});

/// (lambda - 1) volume of a 2D matvec:
///   sum_v |{row(u) : u in N(v)} \ {row(v)}| + |{col(u) : u in N(v)} \ {col(v)}|
/// The row part is the fold traffic of v's output entry, the column part the
/// expand traffic of its input entry.
std::uint64_t communication_volume(const Graph& g, const Partition2D& part);

/// Per-process load. Each vertex's volume term is charged to its home.
struct CommunicationProfile {
  std::vector<std::size_t> local_nnz;
  std::vector<std::uint64_t> volume;
  std::uint64_t total_volume = 0;
};
CommunicationProfile communication_profile(const Graph& g, const Partition2D& part);

/// t_matvec = max over processes of (a * local_nnz + b * volume share).
struct CostModel {
  double a = 1.0;
  double b = 1.0;
  void validate() const;  // a, b > 0
};
double matvec_cost(const CostModel& cm, const CommunicationProfile& profile);

struct Crossover {
  std::uint64_t matvecs = 0;
  bool infinite = false;
};

/// True when t_part_hg + n t_mv_hg <= t_part_random + n t_mv_random, with a
/// relative slack of 1e-12 for rounding in the inputs.
bool amortized(std::uint64_t n, double t_mv_random, double t_mv_hg,
               double t_part_random, double t_part_hg);

/// Smallest n >= 1 with amortized(n, ...). Flagged infinite when the data
/// dependent partition is not cheaper per matvec and never catches up.
Crossover amortization_crossover(double t_mv_random, double t_mv_hg,
                                 double t_part_random, double t_part_hg);
Crossover amortization_crossover(const CostModel& cm,
                                 const CommunicationProfile& random,
                                 const CommunicationProfile& hg,
                                 double t_part_random, double t_part_hg);

struct VolumeTracePoint {
  std::size_t edges = 0;
  std::uint64_t greedy_volume = 0;
  std::uint64_t random_volume = 0;
};

struct StreamPartitionResult {
  Partition2D partition;
  Partition2D random;
  std::size_t prefix_edges = 0;
  std::vector<VolumeTracePoint> trace;  // after each 10% of the stream
};

/// Greedy partition of the first ceil(fraction * |E|) stream edges, frozen and
/// measured as the rest of the stream arrives. The random partition uses
/// split_seed(seed, 1).
StreamPartitionResult partial_stream_partition(std::span<const Edge> stream,
                                               std::size_t n, double fraction,
                                               std::size_t p, std::uint64_t seed,
                                               const GreedyOptions& options = {});

}  // namespace spg
