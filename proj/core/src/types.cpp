#include "stabsim/types.hpp"

#include <algorithm>
#include <stdexcept>

namespace stabsim {

bool FeatureRanking::is_permutation() const {
  std::vector<bool> seen(order.size(), false);
  for (FeatureIndex f : order) {
    if (f >= order.size() || seen[f]) return false;
    seen[f] = true;
  }
  return true;
}

FeatureSubset FeatureSubset::top_of(const FeatureRanking& ranking, std::size_t n_target) {
  if (n_target > ranking.order.size())
    throw std::invalid_argument("FeatureSubset: n_target exceeds ranking length");
  FeatureSubset s;
  s.members.assign(ranking.order.begin(),
                   ranking.order.begin() + static_cast<std::ptrdiff_t>(n_target));
  std::sort(s.members.begin(), s.members.end());
  return s;
}

bool FeatureSubset::contains(FeatureIndex f) const {
  return std::binary_search(members.begin(), members.end(), f);
}

void SimulatorParams::validate() const {
  if (n_target == 0) throw std::invalid_argument("SimulatorParams: n_target must be positive");
  if (n_target > n_useful)
    throw std::invalid_argument("SimulatorParams: n_target must not exceed n_useful");
  if (n_useful > n_feature)
    throw std::invalid_argument("SimulatorParams: n_useful must not exceed n_feature");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("SimulatorParams: p must lie in [0, 1]");
}

}  // namespace stabsim
