#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stabsim/rng.hpp"
#include "stabsim/types.hpp"

namespace stabsim {

/// k distinct elements of pool, uniform over k-subsets, in draw order.
/// Throws std::invalid_argument if k > |pool|.
std::vector<FeatureIndex> sample_without_replacement(std::span<const FeatureIndex> pool,
                                                     std::size_t k, RngStream& rng);

/// sample_without_replacement over the pool {0, ..., n-1}.
std::vector<FeatureIndex> sample_index_subset(std::size_t n, std::size_t k, RngStream& rng);

/// In-place Fisher-Yates shuffle.
void shuffle(std::span<FeatureIndex> values, RngStream& rng);
void shuffle(std::span<std::size_t> values, RngStream& rng);

}  // namespace stabsim
