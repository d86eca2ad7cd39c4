#include <benchmark/benchmark.h>

#include "apiso/integrate.hpp"

using namespace apiso;

static void BM_ClosedForm(benchmark::State& state) {
  const auto D = make_catalog_domain(DomainSpec::product({DomainSpec::ball(2), DomainSpec::hartogs(3)}));
  const auto f = LaurentPolynomial::monomial({2, 1, -1, 0});
  for (auto _ : state) benchmark::DoNotOptimize(norm_closed(D, f, 3.0).value);
}
BENCHMARK(BM_ClosedForm);

static void BM_Quadrature(benchmark::State& state) {
  const auto D = make_catalog_domain(DomainSpec::fk_ball_prime(3));
  const auto f = LaurentPolynomial::monomial({1, -1});
  for (auto _ : state) benchmark::DoNotOptimize(quadrature_norm(D, f, 1.0).value);
}
BENCHMARK(BM_Quadrature)->Unit(benchmark::kMillisecond);

static void BM_MonteCarlo(benchmark::State& state) {
  const auto D = make_catalog_domain(DomainSpec::hartogs(3));
  const HoloFunction f(LaurentPolynomial::monomial({1, 1}));
  const auto samples = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mc_norm(D, f, 1.0, samples, 0).value);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_MonteCarlo)->Arg(10'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
