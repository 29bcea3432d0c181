// Micro-benchmarks for the per-step kernels of the SQMC engine.

#include <algorithm>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "sqmc/hilbert.hpp"
#include "sqmc/lowdisc.hpp"
#include "sqmc/models.hpp"
#include "sqmc/resample.hpp"
#include "sqmc/sqmc.hpp"

namespace {

sqmc::RowMatrix gaussian_cloud(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  sqmc::RowMatrix x(n, d);
  for (auto& v : x.data()) v = g(rng);
  return x;
}

void BM_SobolBlock(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const sqmc::SobolSpec spec{static_cast<std::size_t>(state.range(1))};
  std::uint64_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sqmc::sobol_block(spec, sqmc::ScrambleState::for_step(3, t++), n));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SobolBlock)->Args({1 << 12, 2})->Args({1 << 16, 2})->Args({1 << 12, 6})->Args({1 << 12, 21});

void BM_HilbertSort(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const auto x = gaussian_cloud(n, d);
  const auto cfg = sqmc::HilbertConfig::with_default_bits(d);
  for (auto _ : state) benchmark::DoNotOptimize(sqmc::hilbert_sort_permutation(x, sqmc::PsiTransform::fit(x), cfg));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_HilbertSort)->Args({1 << 12, 1})->Args({1 << 12, 2})->Args({1 << 12, 5})->Args({1 << 16, 5});

void BM_InverseCdf(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> e;
  std::uniform_real_distribution<double> unif;
  std::vector<double> raw(n), u(n);
  for (auto& w : raw) w = e(rng);
  for (auto& v : u) v = unif(rng);
  std::sort(u.begin(), u.end());
  const auto w = sqmc::WeightVector::normalize(raw);
  for (auto _ : state) benchmark::DoNotOptimize(sqmc::inverse_cdf_ancestors(u, w));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_InverseCdf)->Range(1 << 10, 1 << 18);

void BM_Multinomial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = sqmc::WeightVector::uniform(n);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sqmc::multinomial_ancestors(w, n, seed++));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Multinomial)->Range(1 << 10, 1 << 18);

void BM_SqmcLinGauss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const auto data = sqmc::simulate_lingauss(d, 0.4, 10, 5);
  const sqmc::LinGaussModel model(d, 0.4, data.observations, sqmc::Formalism::guided);
  sqmc::SqmcConfig cfg;
  cfg.particles = n;
  cfg.horizon = 10;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sqmc::run_sqmc(model, cfg));
    ++cfg.seed;
  }
  state.SetItemsProcessed(state.iterations() * n * 11);
}
BENCHMARK(BM_SqmcLinGauss)->Args({1 << 12, 1})->Args({1 << 12, 5})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
