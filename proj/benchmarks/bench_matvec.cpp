#include <benchmark/benchmark.h>

#include <vector>

#include "spg/background_model.hpp"
#include "spg/residuals.hpp"
#include "spg/synth.hpp"

namespace {

spg::Graph rmat(int scale) {
  spg::RmatParams p;
  p.scale = static_cast<unsigned>(scale);
  p.seed = 1;
  return spg::rmat_generate(p);
}

void BM_ResidualsMatvec(benchmark::State& state) {
  const spg::Graph g = rmat(static_cast<int>(state.range(0)));
  const std::size_t k = static_cast<std::size_t>(state.range(1));
  std::vector<std::uint32_t> cats(g.num_vertices());
  for (std::size_t i = 0; i < cats.size(); ++i) cats[i] = static_cast<std::uint32_t>(i % k);
  const spg::ResidualsOperator op(g, spg::fit_moment_matching(g, cats, k));
  std::vector<double> x(g.num_vertices(), 1.0), y(g.num_vertices());
  for (auto _ : state) {
    op.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.counters["nnz"] = static_cast<double>(g.nnz());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.nnz()));
}
BENCHMARK(BM_ResidualsMatvec)->ArgsProduct({{10, 13, 16}, {1, 8}});

void BM_TemporalAggregateMatvec(benchmark::State& state) {
  std::vector<spg::Graph> snapshots;
  for (int t = 0; t < 8; ++t) {
    spg::RmatParams p;
    p.scale = 12;
    p.seed = static_cast<std::uint64_t>(t);
    snapshots.push_back(spg::rmat_generate(p));
  }
  const spg::TemporalGraphSequence seq(std::move(snapshots));
  const std::vector<std::uint32_t> cats(seq.num_vertices(), 0);
  const auto model = spg::fit_moment_matching(seq, cats, 1);
  const auto op = spg::aggregate_residuals(seq, model, spg::uniform_weights(8));
  std::vector<double> x(op.size(), 1.0), y(op.size());
  for (auto _ : state) {
    op.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_TemporalAggregateMatvec);

}  // namespace

BENCHMARK_MAIN();
