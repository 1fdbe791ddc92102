#include <benchmark/benchmark.h>

#include "spg/background_model.hpp"
#include "spg/eigensolver.hpp"
#include "spg/synth.hpp"

namespace {

void BM_TopEigenpairs(benchmark::State& state) {
  spg::RmatParams p;
  p.scale = static_cast<unsigned>(state.range(0));
  p.seed = 3;
  const spg::Graph g = spg::rmat_generate(p);
  const spg::ResidualsOperator op(
      g, spg::fit_moment_matching(g, std::vector<std::uint32_t>(g.num_vertices(), 0), 1));
  spg::EigenOptions o;
  o.count = static_cast<std::size_t>(state.range(1));
  std::size_t iterations = 0;
  for (auto _ : state) {
    const auto r = spg::top_eigenpairs(op, o);
    iterations = r.iterations;
    benchmark::DoNotOptimize(r.values.data());
  }
  state.counters["matvecs"] = static_cast<double>(iterations);
}
BENCHMARK(BM_TopEigenpairs)->ArgsProduct({{10, 12, 14}, {1, 10}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
