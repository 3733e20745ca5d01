#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stabsim/dataset.hpp"
#include "stabsim/forest.hpp"
#include "stabsim/rng.hpp"
#include "stabsim/types.hpp"

namespace stabsim {

/// Uniform n_target-subset of S' = {0, ..., n_useful-1}, sorted ascending.
std::vector<FeatureIndex> sample_s_m(const SimulatorParams& params, RngStream& rng);

/// Simulated weak selector: repeatedly flips a p-coin; heads draws uniformly
/// from the remaining members of s_m, tails from the remaining non-members,
/// without replacement, until every feature is drawn. When the chosen pool is
/// exhausted the draw falls back to the other pool. The ranking is draw order.
FeatureRanking simulated_rank(const SimulatorParams& params,
                              std::span<const FeatureIndex> s_m, RngStream& rng);

/// Uniform random permutation of {0, ..., n_feature-1}.
FeatureRanking uniform_rank(std::size_t n_feature, RngStream& rng);

/// Real base selector: random-forest Gini importances sorted descending,
/// ties to the lower feature index. Counts one real run.
/// When config.row_subsample is set, the forest is fit on a with-replacement
/// row sample of size round(subsample_fraction * |rows|).
FeatureRanking real_rank(const Dataset& dataset, std::span<const std::size_t> rows,
                         const ForestConfig& config, RngStream& rng,
                         ExecutionCounter& counter, unsigned workers = 1);

/// A randomized ranking source; one rank() call is one weak-selector run.
/// Implementations must be safe to call concurrently with distinct streams.
class BaseSelector {
 public:
  virtual ~BaseSelector() = default;
  virtual FeatureRanking rank(RngStream& rng) = 0;
  virtual std::size_t n_feature() const = 0;
  virtual std::string describe() const = 0;
};

class RealForestSelector final : public BaseSelector {
 public:
  RealForestSelector(const Dataset& dataset, std::vector<std::size_t> rows,
                     ForestConfig config, ExecutionCounter& counter,
                     unsigned fit_workers = 1);

  FeatureRanking rank(RngStream& rng) override;
  std::size_t n_feature() const override { return dataset_.n_feature; }
  std::string describe() const override;

 private:
  const Dataset& dataset_;
  std::vector<std::size_t> rows_;
  ForestConfig config_;
  ExecutionCounter& counter_;
  unsigned fit_workers_;
};

/// Simulated weak selector drawing a fresh S_m per run.
class SimulatedSelector final : public BaseSelector {
 public:
  explicit SimulatedSelector(SimulatorParams params, ExecutionCounter* counter = nullptr)
      : params_(params), counter_(counter) {
    params_.validate();
  }

  FeatureRanking rank(RngStream& rng) override;
  std::size_t n_feature() const override { return params_.n_feature; }
  std::string describe() const override;

 private:
  SimulatorParams params_;
  ExecutionCounter* counter_;
};

}  // namespace stabsim
