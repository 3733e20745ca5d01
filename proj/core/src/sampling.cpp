#include "stabsim/sampling.hpp"

#include <numeric>
#include <stdexcept>
#include <utility>

namespace stabsim {

namespace {

// Partial Fisher-Yates: after k steps the prefix buf[0..k) holds the draws
// in draw order and is uniform over ordered k-tuples without repetition.
template <typename T>
void partial_fisher_yates(std::vector<T>& buf, std::size_t k, RngStream& rng) {
  const std::size_t n = buf.size();
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(n - i));
    std::swap(buf[i], buf[j]);
  }
}

}  // namespace

std::vector<FeatureIndex> sample_without_replacement(std::span<const FeatureIndex> pool,
                                                     std::size_t k, RngStream& rng) {
  if (k > pool.size())
    throw std::invalid_argument("sample_without_replacement: k exceeds pool size");
  std::vector<FeatureIndex> buf(pool.begin(), pool.end());
  partial_fisher_yates(buf, k, rng);
  buf.resize(k);
  return buf;
}

std::vector<FeatureIndex> sample_index_subset(std::size_t n, std::size_t k, RngStream& rng) {
  if (k > n) throw std::invalid_argument("sample_index_subset: k exceeds n");
  std::vector<FeatureIndex> buf(n);
  std::iota(buf.begin(), buf.end(), FeatureIndex{0});
  partial_fisher_yates(buf, k, rng);
  buf.resize(k);
  return buf;
}

void shuffle(std::span<FeatureIndex> values, RngStream& rng) {
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(values.size() - i));
    std::swap(values[i], values[j]);
  }
}

void shuffle(std::span<std::size_t> values, RngStream& rng) {
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(values.size() - i));
    std::swap(values[i], values[j]);
  }
}

}  // namespace stabsim
