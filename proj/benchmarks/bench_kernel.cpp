#include <benchmark/benchmark.h>

#include "apiso/kernel.hpp"

using namespace apiso;

static void BM_Gram(benchmark::State& state) {
  const auto D = make_catalog_domain(DomainSpec::disc());
  const auto b = make_basis(D, tensor_degree_indices(1, static_cast<int>(state.range(0))), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(bergman2_gram(D, b, Point{0.5}).value);
}
BENCHMARK(BM_Gram)->Arg(10)->Arg(20);

static void BM_MinNorm(benchmark::State& state) {
  const auto D = make_catalog_domain(DomainSpec::disc());
  const double p = static_cast<double>(state.range(1)) / 2.0;
  const auto b = make_basis(D, tensor_degree_indices(1, static_cast<int>(state.range(0))), p);
  for (auto _ : state) benchmark::DoNotOptimize(pbergman_min_norm(D, b, Point{cplx(0.3, 0.2)}, p).value);
}
BENCHMARK(BM_MinNorm)->Args({10, 2})->Args({10, 4})->Args({4, 1})->Unit(benchmark::kMillisecond);

static void BM_MinNormBidisc(benchmark::State& state) {
  const auto D = make_catalog_domain(DomainSpec::polydisc(2, {1.0, 1.0}));
  const auto b = make_basis(D, tensor_degree_indices(2, 3), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(pbergman_min_norm(D, b, Point{0.2, 0.1}, 1.0).value);
}
BENCHMARK(BM_MinNormBidisc)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
