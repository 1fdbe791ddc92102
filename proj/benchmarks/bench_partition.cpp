#include <benchmark/benchmark.h>

#include "spg/partition.hpp"
#include "spg/synth.hpp"

namespace {

spg::Graph rmat(int scale) {
  spg::RmatParams p;
  p.scale = static_cast<unsigned>(scale);
  p.avg_degree = 8.0;
  p.seed = 5;
  return spg::rmat_generate(p);
}

void BM_RandomPartition(benchmark::State& state) {
  const spg::Graph g = rmat(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(spg::random_partition(g, 16, 1).home.data());
}
BENCHMARK(BM_RandomPartition)->Arg(13)->Arg(15);

void BM_GreedyPartition(benchmark::State& state) {
  const spg::Graph g = rmat(static_cast<int>(state.range(0)));
  std::uint64_t volume = 0;
  for (auto _ : state) {
    const auto part = spg::greedy_hypergraph_partition(g, 16, 1);
    volume = spg::communication_volume(g, part);
  }
  state.counters["volume"] = static_cast<double>(volume);
}
BENCHMARK(BM_GreedyPartition)->Arg(13)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_CommunicationVolume(benchmark::State& state) {
  const spg::Graph g = rmat(static_cast<int>(state.range(0)));
  const auto part = spg::random_partition(g, 16, 2);
  for (auto _ : state) benchmark::DoNotOptimize(spg::communication_volume(g, part));
}
BENCHMARK(BM_CommunicationVolume)->Arg(13)->Arg(15);

}  // namespace

BENCHMARK_MAIN();
