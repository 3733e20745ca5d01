#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "stabsim/rng.hpp"
#include "stabsim/types.hpp"

namespace stabsim {

struct StabilityRun {
  std::vector<FeatureSubset> subsets;
  double j = 0.0;
};

/// Mean Jaccard similarity over all unordered subset pairs:
/// J = 2 / (U (U-1)) * sum_{i<j} |s_i n s_j| / |s_i u s_j|.
/// Throws std::invalid_argument for fewer than two subsets.
double pairwise_jaccard(std::span<const FeatureSubset> subsets);

using SubsetFactory = std::function<FeatureSubset(RngStream&)>;

/// Runs the factory m_stability times on derived streams and reduces with
/// pairwise_jaccard (fixed i<j order).
StabilityRun estimate_stability(const SubsetFactory& factory, std::size_t m_stability,
                                RngStream& rng, unsigned workers = 1);

}  // namespace stabsim
