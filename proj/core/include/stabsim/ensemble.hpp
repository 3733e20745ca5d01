#pragma once

#include <cstddef>
#include <span>

#include "stabsim/selectors.hpp"
#include "stabsim/types.hpp"

namespace stabsim {

/// Ensemble of m_ensemble weak selectors aggregated by mean rank (the only
/// aggregation variant).
struct EnsembleConfig {
  std::size_t m_ensemble = 1;
  std::size_t n_target = 1;

  void validate() const;
};

/// Mean of 1-based rank positions per feature; the n_target features with the
/// smallest mean rank win, ties to the lower feature index.
FeatureSubset mean_rank_aggregate(std::span<const FeatureRanking> rankings,
                                  std::size_t n_target);

/// m_ensemble rank() calls on derived streams, mean-rank aggregated.
FeatureSubset run_selector_ensemble(BaseSelector& selector, const EnsembleConfig& config,
                                    RngStream& rng, unsigned workers = 1);

/// Simulated ensemble: fresh (S_m, ranking) pair per weak selector.
FeatureSubset run_simulated_ensemble(const SimulatorParams& params, const EnsembleConfig& config,
                                     RngStream& rng, ExecutionCounter* counter = nullptr,
                                     unsigned workers = 1);

/// Real ensemble: m_ensemble forest rankings; counter.real_runs grows by
/// m_ensemble.
FeatureSubset run_real_ensemble(const Dataset& dataset, std::span<const std::size_t> rows,
                                const ForestConfig& fconfig, const EnsembleConfig& config,
                                RngStream& rng, ExecutionCounter& counter, unsigned workers = 1);

}  // namespace stabsim
