#include <benchmark/benchmark.h>

#include "stabsim/ensemble.hpp"
#include "stabsim/sampling.hpp"
#include "stabsim/selectors.hpp"
#include "stabsim/stability.hpp"

using namespace stabsim;

namespace {

void BM_simulated_rank(benchmark::State& state) {
  const std::size_t n_feature = static_cast<std::size_t>(state.range(0));
  const SimulatorParams params{n_feature, 20, 60, 0.7};
  RngStream rng = make_stream(1, 0);
  const auto s_m = sample_s_m(params, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulated_rank(params, s_m, rng));
  }
}
BENCHMARK(BM_simulated_rank)->Arg(500)->Arg(2000)->Arg(5966);

void BM_uniform_rank(benchmark::State& state) {
  const std::size_t n_feature = static_cast<std::size_t>(state.range(0));
  RngStream rng = make_stream(2, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(uniform_rank(n_feature, rng));
  }
}
BENCHMARK(BM_uniform_rank)->Arg(2000)->Arg(5966);

void BM_sample_s_m(benchmark::State& state) {
  const SimulatorParams params{2000, 20, static_cast<std::size_t>(state.range(0)), 0.7};
  RngStream rng = make_stream(3, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_s_m(params, rng));
  }
}
BENCHMARK(BM_sample_s_m)->Arg(60)->Arg(200);

void BM_mean_rank_aggregate(benchmark::State& state) {
  const std::size_t m = static_cast<std::size_t>(state.range(0));
  RngStream rng = make_stream(4, 0);
  std::vector<FeatureRanking> rankings;
  for (std::size_t i = 0; i < m; ++i) rankings.push_back(uniform_rank(2000, rng));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mean_rank_aggregate(rankings, 20));
  }
}
BENCHMARK(BM_mean_rank_aggregate)->Arg(1)->Arg(10)->Arg(50);

void BM_pairwise_jaccard(benchmark::State& state) {
  const std::size_t u = static_cast<std::size_t>(state.range(0));
  RngStream rng = make_stream(5, 0);
  std::vector<FeatureSubset> subsets;
  for (std::size_t i = 0; i < u; ++i) {
    FeatureSubset s;
    s.members = sample_index_subset(2000, 20, rng);
    std::sort(s.members.begin(), s.members.end());
    subsets.push_back(std::move(s));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(pairwise_jaccard(subsets));
  }
}
BENCHMARK(BM_pairwise_jaccard)->Arg(10)->Arg(30)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
