#include "stabsim/theory.hpp"

#include <numeric>
#include <stdexcept>
#include <vector>

#include "stabsim/parallel.hpp"

namespace stabsim {

void FirstDrawInputs::validate() const {
  if (n_t == 0) throw std::invalid_argument("FirstDrawInputs: n_t must be positive");
  if (n_t > n_m) throw std::invalid_argument("FirstDrawInputs: n_t must not exceed n_m");
  if (n_m > n_f) throw std::invalid_argument("FirstDrawInputs: n_m must not exceed n_f");
  if (n_t >= n_f) throw std::invalid_argument("FirstDrawInputs: n_t must be below n_f");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("FirstDrawInputs: p must be in [0, 1]");
}

double p0_closed_form(const FirstDrawInputs& in) {
  in.validate();
  const double nf = static_cast<double>(in.n_f);
  const double nt = static_cast<double>(in.n_t);
  const double nm = static_cast<double>(in.n_m);
  return ((nf - nm) * in.p + (nm - nt)) / (nm * (nf - nt));
}

double first_draw_threshold(std::size_t n_f, std::size_t n_t) {
  if (n_f == 0) throw std::invalid_argument("first_draw_threshold: n_f must be positive");
  return static_cast<double>(n_t) / static_cast<double>(n_f);
}

namespace {

// One first-draw experiment. The pool holds a permutation-in-progress of S';
// the prefix pool[0..n_t) after the partial shuffle is S_0. Swaps are undone
// afterwards so the pool can be reused.
bool first_draw_hits_zero(std::vector<std::uint32_t>& pool, std::size_t n_t,
                          std::size_t n_f, double p, RngStream& rng,
                          std::vector<std::size_t>& swap_log) {
  const std::size_t n_m = pool.size();
  swap_log.clear();
  for (std::size_t i = 0; i < n_t; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(n_m - i));
    std::swap(pool[i], pool[j]);
    swap_log.push_back(j);
  }

  bool hit;
  if (rng.bernoulli(p)) {
    const std::size_t pick = static_cast<std::size_t>(rng.uniform_below(n_t));
    hit = pool[pick] == 0;
  } else {
    // Uniform over S \ S_0 via the sorted-order position; feature 0 sits at
    // position 0 of the complement exactly when it is not in S_0.
    bool zero_in_s0 = false;
    for (std::size_t i = 0; i < n_t; ++i)
      if (pool[i] == 0) { zero_in_s0 = true; break; }
    const std::size_t pick = static_cast<std::size_t>(rng.uniform_below(n_f - n_t));
    hit = !zero_in_s0 && pick == 0;
  }

  for (std::size_t i = n_t; i-- > 0;) std::swap(pool[i], pool[swap_log[i]]);
  return hit;
}

}  // namespace

double p0_monte_carlo(const FirstDrawInputs& in, std::size_t trials, RngStream& rng,
                      unsigned workers) {
  in.validate();
  if (trials == 0) throw std::invalid_argument("p0_monte_carlo: trials must be >= 1");

  constexpr std::size_t kBlock = 65536;
  const std::size_t n_blocks = (trials + kBlock - 1) / kBlock;
  std::vector<std::uint64_t> hits(n_blocks, 0);
  parallel_for(n_blocks, workers, [&](std::size_t b) {
    RngStream block_rng = rng.derive(b);
    std::vector<std::uint32_t> pool(in.n_m);
    std::iota(pool.begin(), pool.end(), 0u);
    std::vector<std::size_t> swap_log;
    swap_log.reserve(in.n_t);
    const std::size_t block_trials = b + 1 == n_blocks ? trials - b * kBlock : kBlock;
    std::uint64_t block_hits = 0;
    for (std::size_t t = 0; t < block_trials; ++t)
      if (first_draw_hits_zero(pool, in.n_t, in.n_f, in.p, block_rng, swap_log))
        ++block_hits;
    hits[b] = block_hits;
  });

  std::uint64_t total = 0;
  for (std::uint64_t h : hits) total += h;
  return static_cast<double>(total) / static_cast<double>(trials);
}

int p0_compare_uniform_rational(std::size_t n_f, std::size_t n_t, std::size_t n_m,
                                std::int64_t p_num, std::int64_t p_den) {
  if (p_den <= 0) throw std::invalid_argument("p0_compare_uniform_rational: p_den must be > 0");
  if (p_num < 0 || p_num > p_den)
    throw std::invalid_argument("p0_compare_uniform_rational: p must be in [0, 1]");
  FirstDrawInputs in{n_f, n_t, n_m, static_cast<double>(p_num) / static_cast<double>(p_den)};
  in.validate();

  // p0 = ((n_f - n_m) p_num / p_den + (n_m - n_t)) / (n_m (n_f - n_t))
  //    = ((n_f - n_m) p_num + (n_m - n_t) p_den) / (n_m (n_f - n_t) p_den)
  // compare with 1 / n_f by cross-multiplication (all terms non-negative).
  using wide = __int128;
  const wide num = static_cast<wide>(n_f - n_m) * p_num + static_cast<wide>(n_m - n_t) * p_den;
  const wide den = static_cast<wide>(n_m) * static_cast<wide>(n_f - n_t) * p_den;
  const wide lhs = num * static_cast<wide>(n_f);
  if (lhs < den) return -1;
  if (lhs > den) return 1;
  return 0;
}

}  // namespace stabsim
