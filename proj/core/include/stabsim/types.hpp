#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace stabsim {

using FeatureIndex = std::uint32_t;

/// Total order over feature indices. order[0] is the best feature (rank 1).
struct FeatureRanking {
  std::vector<FeatureIndex> order;

  std::size_t n_feature() const { return order.size(); }
  bool is_permutation() const;
};

/// Set of n_target selected features, kept sorted ascending.
struct FeatureSubset {
  std::vector<FeatureIndex> members;

  static FeatureSubset top_of(const FeatureRanking& ranking, std::size_t n_target);

  std::size_t size() const { return members.size(); }
  bool contains(FeatureIndex f) const;
  bool operator==(const FeatureSubset&) const = default;
};

/// Parameters of the simulated weak selector.
struct SimulatorParams {
  std::size_t n_feature = 0;
  std::size_t n_target = 0;
  std::size_t n_useful = 0;
  double p = 0.0;

  /// Throws std::invalid_argument unless 0 < n_target <= n_useful <= n_feature
  /// and 0 <= p <= 1.
  void validate() const;
};

/// Shared run accounting: how many real and simulated selector executions a
/// pipeline performed. Safe to increment from concurrent workers.
class ExecutionCounter {
 public:
  void add_real(std::uint64_t n = 1) { real_.fetch_add(n, std::memory_order_relaxed); }
  void add_simulated(std::uint64_t n = 1) { simulated_.fetch_add(n, std::memory_order_relaxed); }

  struct Snapshot {
    std::uint64_t real_runs = 0;
    std::uint64_t simulated_runs = 0;
  };
  Snapshot snapshot() const {
    return {real_.load(std::memory_order_relaxed), simulated_.load(std::memory_order_relaxed)};
  }

 private:
  std::atomic<std::uint64_t> real_{0};
  std::atomic<std::uint64_t> simulated_{0};
};

}  // namespace stabsim
