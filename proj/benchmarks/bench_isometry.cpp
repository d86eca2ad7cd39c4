#include <benchmark/benchmark.h>

#include "apiso/isometry.hpp"

using namespace apiso;

static void BM_Battery(benchmark::State& state) {
  const auto T = counterexample_isometry(3, 2);
  const auto battery = admissible_monomial_battery(T, 30, 0);
  for (auto _ : state) benchmark::DoNotOptimize(verify_isometry(T, battery, NormMethod::closed_form).max_discrepancy);
}
BENCHMARK(BM_Battery);

static void BM_Equimeasure(benchmark::State& state) {
  const auto T = counterexample_isometry(3, 2);
  const auto fam = coordinate_family(T);
  const auto boxes = random_ratio_boxes(T, fam, 20, 0);
  const auto samples = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(equimeasure_check(T, fam, boxes, samples, 0).verdict);
}
BENCHMARK(BM_Equimeasure)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
