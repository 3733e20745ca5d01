#pragma once

#include <array>
#include <cstdint>

namespace stabsim {

/// Counter-based random stream (Philox4x64-10, 256-bit counter, 128-bit key).
///
/// Two streams built from the same (master_seed, stream_id) produce identical
/// sequences; distinct stream ids give statistically independent sequences.
/// A stream is single-owner: never share one instance across threads. Give
/// each concurrent job its own stream via derive().
///
/// The sequence for key (s, i) is bit-compatible with NumPy's
/// Philox(key = s | i << 64).random_raw().
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1), 53-bit resolution.
  double next_double();

  /// Uniform integer in [0, bound). bound must be >= 1. Unbiased.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// True with probability p. Exact at p = 0 and p = 1.
  bool bernoulli(double p);

  /// Standard normal deviate (Box-Muller, two uniforms per call).
  double next_gaussian();

  /// Independent child stream addressed by (this stream, child_id).
  /// Depends only on the stream identity, not on how much has been consumed,
  /// so a stream layout is stable regardless of evaluation order.
  RngStream derive(std::uint64_t child_id) const;

  std::uint64_t master_seed() const { return key_[0]; }
  std::uint64_t stream_id() const { return key_[1]; }

 private:
  void refill();

  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> counter_;
  std::array<std::uint64_t, 4> block_;
  int pos_;
};

inline RngStream make_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
  return RngStream(master_seed, stream_id);
}

/// Bijective-in-b combiner used for child stream ids (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

/// Generator family recorded in report metadata.
inline constexpr const char* kRngFamily = "philox4x64-10";

}  // namespace stabsim
