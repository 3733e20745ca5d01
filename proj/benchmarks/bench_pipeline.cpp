#include <benchmark/benchmark.h>

#include "stabsim/ensemble.hpp"
#include "stabsim/estimation.hpp"
#include "stabsim/stability.hpp"
#include "stabsim/theory.hpp"

using namespace stabsim;

namespace {

// Stability of the simulated ensemble at the reference dimensions; the
// argument is m_ensemble, showing the moderate growth in ensemble size.
void BM_simulated_stability(benchmark::State& state) {
  const SimulatorParams params{2000, 20, 60, 0.7};
  const EnsembleConfig config{static_cast<std::size_t>(state.range(0)), 20};
  const SubsetFactory factory = [&](RngStream& replica_rng) {
    return run_simulated_ensemble(params, config, replica_rng);
  };
  RngStream rng = make_stream(21, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_stability(factory, 30, rng));
  }
}
BENCHMARK(BM_simulated_stability)->Arg(1)->Arg(10)->Arg(30)->Arg(50)
    ->Unit(benchmark::kMillisecond);

void BM_full_calibration_simulated_truth(benchmark::State& state) {
  CalibrationConfig config;
  config.n_target = 20;
  config.m_ensemble = 50;
  config.m_stability = 30;
  config.curve_m_ensemble = {1, 30};
  for (auto _ : state) {
    ExecutionCounter counter;
    SimulatedSelector truth({2000, 20, 60, 0.7}, &counter);
    RngStream rng = make_stream(22, 0);
    benchmark::DoNotOptimize(full_calibration(truth, config, rng, counter));
  }
}
BENCHMARK(BM_full_calibration_simulated_truth)->Unit(benchmark::kMillisecond);

void BM_p0_monte_carlo(benchmark::State& state) {
  const FirstDrawInputs inputs{2000, 20, 60, 0.7};
  RngStream rng = make_stream(23, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        p0_monte_carlo(inputs, static_cast<std::size_t>(state.range(0)), rng));
  }
}
BENCHMARK(BM_p0_monte_carlo)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
