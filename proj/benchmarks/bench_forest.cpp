#include <benchmark/benchmark.h>

#include <numeric>

#include "stabsim/forest.hpp"
#include "stabsim/selectors.hpp"

using namespace stabsim;

namespace {

Dataset bench_dataset(std::size_t n_sample, std::size_t n_feature) {
  RngStream rng = make_stream(11, 0);
  SynthConfig config{.n_sample = n_sample, .n_feature = n_feature, .n_informative = 10,
                     .n_class = 2, .noise_level = 1.0, .discretize_levels = std::nullopt};
  return synth_generate(config, rng);
}

void BM_fit_forest(benchmark::State& state) {
  const Dataset dataset = bench_dataset(60, static_cast<std::size_t>(state.range(0)));
  std::vector<std::size_t> rows(dataset.n_sample);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  ForestConfig config;
  config.n_tree = static_cast<std::size_t>(state.range(1));
  RngStream rng = make_stream(12, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_forest(dataset, rows, config, rng));
  }
}
BENCHMARK(BM_fit_forest)->Args({100, 50})->Args({500, 100})->Args({500, 300});

void BM_gini_importance(benchmark::State& state) {
  const Dataset dataset = bench_dataset(60, 500);
  std::vector<std::size_t> rows(dataset.n_sample);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  ForestConfig config;
  config.n_tree = 100;
  RngStream rng = make_stream(13, 0);
  const Forest forest = fit_forest(dataset, rows, config, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gini_importance(forest));
  }
}
BENCHMARK(BM_gini_importance);

void BM_real_rank(benchmark::State& state) {
  const Dataset dataset = bench_dataset(60, 500);
  std::vector<std::size_t> rows(dataset.n_sample);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  ForestConfig config;
  config.n_tree = 100;
  ExecutionCounter counter;
  RngStream rng = make_stream(14, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(real_rank(dataset, rows, config, rng, counter));
  }
}
BENCHMARK(BM_real_rank);

}  // namespace

BENCHMARK_MAIN();
