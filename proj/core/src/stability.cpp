#include "stabsim/stability.hpp"

#include <stdexcept>

#include "stabsim/parallel.hpp"

namespace stabsim {

namespace {

std::size_t intersection_size(const FeatureSubset& a, const FeatureSubset& b) {
  std::size_t i = 0, j = 0, n = 0;
  while (i < a.members.size() && j < b.members.size()) {
    if (a.members[i] < b.members[j]) ++i;
    else if (a.members[i] > b.members[j]) ++j;
    else { ++n; ++i; ++j; }
  }
  return n;
}

}  // namespace

double pairwise_jaccard(std::span<const FeatureSubset> subsets) {
  const std::size_t u = subsets.size();
  if (u < 2) throw std::invalid_argument("pairwise_jaccard: need at least two subsets");
  double total = 0.0;
  for (std::size_t i = 0; i < u; ++i) {
    for (std::size_t j = i + 1; j < u; ++j) {
      const std::size_t inter = intersection_size(subsets[i], subsets[j]);
      const std::size_t uni = subsets[i].size() + subsets[j].size() - inter;
      total += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    }
  }
  return 2.0 * total / (static_cast<double>(u) * static_cast<double>(u - 1));
}

StabilityRun estimate_stability(const SubsetFactory& factory, std::size_t m_stability,
                                RngStream& rng, unsigned workers) {
  if (m_stability < 2)
    throw std::invalid_argument("estimate_stability: m_stability must be >= 2");
  StabilityRun run;
  run.subsets.resize(m_stability);
  parallel_for(m_stability, workers, [&](std::size_t r) {
    RngStream replica_rng = rng.derive(r);
    run.subsets[r] = factory(replica_rng);
  });
  run.j = pairwise_jaccard(run.subsets);
  return run;
}

}  // namespace stabsim
