#include "stabsim/ensemble.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "stabsim/parallel.hpp"

namespace stabsim {

void EnsembleConfig::validate() const {
  if (m_ensemble == 0) throw std::invalid_argument("EnsembleConfig: m_ensemble must be >= 1");
  if (n_target == 0) throw std::invalid_argument("EnsembleConfig: n_target must be >= 1");
}

FeatureSubset mean_rank_aggregate(std::span<const FeatureRanking> rankings,
                                  std::size_t n_target) {
  if (rankings.empty()) throw std::invalid_argument("mean_rank_aggregate: no rankings");
  const std::size_t n_feature = rankings.front().n_feature();
  if (n_target == 0 || n_target > n_feature)
    throw std::invalid_argument("mean_rank_aggregate: n_target out of range");

  // Mean rank orders identically to the integer rank sum, so the selection is
  // exact; no floating point is involved.
  std::vector<std::uint64_t> rank_sums(n_feature, 0);
  for (const FeatureRanking& ranking : rankings) {
    if (ranking.n_feature() != n_feature)
      throw std::invalid_argument("mean_rank_aggregate: inconsistent ranking lengths");
    for (std::size_t pos = 0; pos < n_feature; ++pos)
      rank_sums[ranking.order[pos]] += pos + 1;
  }

  std::vector<FeatureIndex> features(n_feature);
  std::iota(features.begin(), features.end(), FeatureIndex{0});
  std::nth_element(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(n_target - 1),
                   features.end(), [&](FeatureIndex a, FeatureIndex b) {
                     if (rank_sums[a] != rank_sums[b]) return rank_sums[a] < rank_sums[b];
                     return a < b;
                   });
  FeatureSubset subset;
  subset.members.assign(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(n_target));
  std::sort(subset.members.begin(), subset.members.end());
  return subset;
}

FeatureSubset run_selector_ensemble(BaseSelector& selector, const EnsembleConfig& config,
                                    RngStream& rng, unsigned workers) {
  config.validate();
  std::vector<FeatureRanking> rankings(config.m_ensemble);
  parallel_for(config.m_ensemble, workers, [&](std::size_t m) {
    RngStream member_rng = rng.derive(m);
    rankings[m] = selector.rank(member_rng);
  });
  return mean_rank_aggregate(rankings, config.n_target);
}

FeatureSubset run_simulated_ensemble(const SimulatorParams& params, const EnsembleConfig& config,
                                     RngStream& rng, ExecutionCounter* counter, unsigned workers) {
  params.validate();
  SimulatedSelector selector(params, counter);
  return run_selector_ensemble(selector, config, rng, workers);
}

FeatureSubset run_real_ensemble(const Dataset& dataset, std::span<const std::size_t> rows,
                                const ForestConfig& fconfig, const EnsembleConfig& config,
                                RngStream& rng, ExecutionCounter& counter, unsigned workers) {
  RealForestSelector selector(dataset, {rows.begin(), rows.end()}, fconfig, counter);
  return run_selector_ensemble(selector, config, rng, workers);
}

}  // namespace stabsim
