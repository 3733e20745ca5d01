#pragma once

#include <cstddef>
#include <cstdint>

#include "stabsim/rng.hpp"

namespace stabsim {

/// Dimensions for the first-draw analysis of the simulated selector.
struct FirstDrawInputs {
  std::size_t n_f = 0;  // n_feature
  std::size_t n_t = 0;  // n_target
  std::size_t n_m = 0;  // n_useful
  double p = 0.0;

  /// Throws std::invalid_argument unless 0 < n_t <= n_m <= n_f, n_t < n_f,
  /// and p in [0, 1].
  void validate() const;
};

/// Probability that a fixed member of S' is the first feature drawn:
/// p0 = ((n_f - n_m) p + (n_m - n_t)) / (n_m (n_f - n_t)).
double p0_closed_form(const FirstDrawInputs& in);

/// Literal simulation of the first draw: S_0 is a uniform n_t-subset of S',
/// then the draw comes from S_0 with probability p, otherwise from its
/// complement. Returns the hit fraction for a fixed member of S'.
double p0_monte_carlo(const FirstDrawInputs& in, std::size_t trials, RngStream& rng,
                      unsigned workers = 1);

/// The threshold n_t / n_f: p above it makes S' members more likely than
/// uniform, p below makes them less likely.
double first_draw_threshold(std::size_t n_f, std::size_t n_t);

/// Exact rational comparison of p0 against 1/n_f for p = p_num / p_den.
/// Returns -1, 0, or +1.
int p0_compare_uniform_rational(std::size_t n_f, std::size_t n_t, std::size_t n_m,
                                std::int64_t p_num, std::int64_t p_den);

}  // namespace stabsim
