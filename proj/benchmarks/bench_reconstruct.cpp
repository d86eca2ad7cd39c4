#include <benchmark/benchmark.h>

#include "apiso/reconstruct.hpp"

using namespace apiso;

static void BM_SolvePoint(benchmark::State& state) {
  const auto T = counterexample_isometry(3, 2);
  const auto maps = build_ratio_maps(IsometryOracle::from(T), default_family(T, static_cast<int>(state.range(0))));
  const Point z{0.3, 0.2, 0.5, 0.05};
  for (auto _ : state) benchmark::DoNotOptimize(solve_point(maps, T.target(), z, {}).residual);
}
BENCHMARK(BM_SolvePoint)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_ReconstructGrid(benchmark::State& state) {
  const auto T = counterexample_isometry(3, 2);
  const auto full = grid_points(T.source().without_exclusions(), 3);
  std::vector<Point> grid;
  for (std::size_t i = 0; i < full.size() && grid.size() < 100; i += full.size() / 100) grid.push_back(full[i]);
  const auto fam = default_family(T, 2);
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct_map(IsometryOracle::from(T), fam, grid).mapped);
}
BENCHMARK(BM_ReconstructGrid)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
