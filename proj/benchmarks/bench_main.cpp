#include <benchmark/benchmark.h>

#include <vector>

#include "lowsnr/asymptotics.hpp"
#include "lowsnr/mi.hpp"
#include "lowsnr/prediction.hpp"
#include "lowsnr/simulate.hpp"

using namespace lowsnr;

static void BM_FinitePast(benchmark::State& state) {
  const auto m = FadingModel::ar1(0.5);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(finite_past_pred_error(m, 1.0, n).error);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FinitePast)->RangeMultiplier(4)->Range(16, 1024)->Complexity(benchmark::oNCubed);

static void BM_PhiIntegral(benchmark::State& state) {
  const auto m = FadingModel::ar1(0.8);
  for (auto _ : state) benchmark::DoNotOptimize(phi_integral(m));
}
BENCHMARK(BM_PhiIntegral);

static void BM_PhiSeries(benchmark::State& state) {
  const auto m = FadingModel::band_limited(0.25);
  for (auto _ : state) benchmark::DoNotOptimize(phi_series(m));
}
BENCHMARK(BM_PhiSeries);

static void BM_PhiViaLimit(benchmark::State& state) {
  const auto m = FadingModel::ar1(0.5);
  const std::vector<double> rho{1e-1, 1e-2, 1e-3};
  for (auto _ : state) benchmark::DoNotOptimize(phi_via_limit(m, rho).phi);
}
BENCHMARK(BM_PhiViaLimit);

static void BM_CirculantSynthesis(benchmark::State& state) {
  const auto m = FadingModel::band_limited(0.25);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gen_fading(m, n, ++seed).data());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CirculantSynthesis)->RangeMultiplier(16)->Range(1 << 10, 1 << 20)->Unit(benchmark::kMillisecond);

static void BM_MiMonteCarlo(benchmark::State& state) {
  const auto m = FadingModel::ar1(0.5);
  const BlockScheme scheme{1.0, 5.0 / 6.0, static_cast<std::size_t>(state.range(0))};
  constexpr std::size_t kSamples = 20'000;
  MonteCarloOptions opts;
  opts.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(mi_monte_carlo(scheme, m, 10.0, kSamples, 1, opts).estimate);
  state.SetItemsProcessed(state.iterations() * static_cast<long>(kSamples));
}
BENCHMARK(BM_MiMonteCarlo)->DenseRange(1, 9, 4)->Unit(benchmark::kMillisecond);

static void BM_SecondOrderExact(benchmark::State& state) {
  const auto m = FadingModel::ar1(0.5);
  const auto law = scheme_to_law({1.0, 0.5, static_cast<std::size_t>(state.range(0))});
  for (auto _ : state) benchmark::DoNotOptimize(second_order_coeff_exact(law, m));
}
BENCHMARK(BM_SecondOrderExact)->DenseRange(2, 12, 5);
BENCHMARK_MAIN();
