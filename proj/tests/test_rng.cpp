#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "stabsim/rng.hpp"
#include "stabsim/sampling.hpp"
#include "stabsim/types.hpp"

using namespace stabsim;

TEST_CASE("philox reference vectors") {
  // Frozen from NumPy: Philox(key=s | i<<64).random_raw(8).
  struct Vector {
    std::uint64_t seed, stream;
    std::array<std::uint64_t, 8> raw;
  };
  const Vector vectors[] = {
      {0, 0,
       {0x02f4ba6408e4d89bull, 0x3dd62b0b9ca8c5b2ull, 0x1c8667a55d902e79ull,
        0x907d7a052fd5b4dcull, 0x809bf322883987c3ull, 0x471128b9e807f7ddull,
        0xf250ba0dbec065b7ull, 0xfc6ed66767a457bcull}},
      {42, 0,
       {0xd1f8817d4d62880eull, 0x307266b65cc8797eull, 0xde1f04e7f084ed03ull,
        0x65034a8e78cd1e59ull, 0x5e3daa8961c3e3d3ull, 0x6f37dea4a04bd05cull,
        0x31d3a1ae26e190b9ull, 0x0fef7fae0ab2a01aull}},
      {42, 1,
       {0x719965f2debb5c86ull, 0xd0ff12852bfefaa0ull, 0x824f8a46917b59d3ull,
        0x633af9b3183bb36aull, 0x0665962d67a5a63aull, 0x58fb335daa5560b5ull,
        0xf7121f0faa702e07ull, 0xc5ae1d90ae3ad1a6ull}},
      {7, 3,
       {0x7b6cc7b1862cc5f2ull, 0xb960f2ea4b3f8d9full, 0x0cdd72e015deb1a6ull,
        0x50edb0d22a6a6fd5ull, 0xae45891bf7ab4df3ull, 0x32005aae5c700f2cull,
        0x8338143a55135bc9ull, 0x505c59bbd33bc5faull}},
  };
  for (const auto& v : vectors) {
    RngStream s = make_stream(v.seed, v.stream);
    for (std::uint64_t expected : v.raw) CHECK(s.next_u64() == expected);
  }
}

TEST_CASE("same key reproduces, distinct streams differ") {
  RngStream a = make_stream(42, 0);
  RngStream b = make_stream(42, 0);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c = make_stream(42, 0);
  RngStream d = make_stream(42, 1);
  int differing = 0;
  for (int i = 0; i < 100; ++i)
    if (c.next_u64() != d.next_u64()) ++differing;
  CHECK(differing > 90);

  RngStream e = make_stream(7, 3);
  RngStream f = make_stream(7, 3);
  CHECK(e.next_u64() == f.next_u64());
}

TEST_CASE("derive is consumption independent and collision free per parent") {
  RngStream parent = make_stream(9, 4);
  RngStream child_before = parent.derive(5);
  for (int i = 0; i < 17; ++i) parent.next_u64();
  RngStream child_after = parent.derive(5);
  for (int i = 0; i < 20; ++i) CHECK(child_before.next_u64() == child_after.next_u64());

  std::set<std::uint64_t> ids;
  for (std::uint64_t c = 0; c < 1000; ++c) ids.insert(parent.derive(c).stream_id());
  CHECK(ids.size() == 1000);
}

TEST_CASE("next_double range and uniform_below bounds") {
  RngStream s = make_stream(1, 0);
  for (int i = 0; i < 10000; ++i) {
    const double d = s.next_double();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
  }
  for (int i = 0; i < 10000; ++i) CHECK(s.uniform_below(7) < 7);
  CHECK(s.uniform_below(1) == 0);
}

TEST_CASE("bernoulli is exact at the endpoints") {
  RngStream s = make_stream(3, 0);
  for (int i = 0; i < 1000; ++i) {
    CHECK(s.bernoulli(1.0));
    CHECK_FALSE(s.bernoulli(0.0));
  }
}

TEST_CASE("gaussian moments") {
  RngStream s = make_stream(11, 0);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = s.next_gaussian();
    sum += g;
    sum_sq += g * g;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("sample_without_replacement forced cases") {
  RngStream s = make_stream(5, 0);
  const std::vector<FeatureIndex> single{0};
  CHECK(sample_without_replacement(single, 1, s) == std::vector<FeatureIndex>{0});

  const std::vector<FeatureIndex> three{0, 1, 2};
  auto draw = sample_without_replacement(three, 3, s);
  std::sort(draw.begin(), draw.end());
  CHECK(draw == three);

  CHECK_THROWS_AS(sample_without_replacement(single, 2, s), std::invalid_argument);
}

TEST_CASE("sample_without_replacement never repeats") {
  RngStream s = make_stream(6, 0);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = 1 + s.uniform_below(30);
    const std::size_t k = 1 + s.uniform_below(n);
    const auto draw = sample_index_subset(n, k, s);
    std::set<FeatureIndex> unique(draw.begin(), draw.end());
    CHECK(unique.size() == draw.size());
    for (FeatureIndex f : draw) CHECK(f < n);
  }
}

TEST_CASE("pair frequencies match the multinomial oracle") {
  // pool {0..9}, k=2: each unordered pair has probability 1/45. With 1e5
  // trials the count per pair is Binomial(1e5, 1/45); check within 3 sigma.
  const std::size_t trials = 100000;
  const double p_pair = 1.0 / 45.0;
  const double sigma = std::sqrt(trials * p_pair * (1.0 - p_pair));

  RngStream s = make_stream(2024, 0);
  std::map<std::pair<FeatureIndex, FeatureIndex>, std::size_t> counts;
  for (std::size_t t = 0; t < trials; ++t) {
    auto draw = sample_index_subset(10, 2, s);
    std::sort(draw.begin(), draw.end());
    ++counts[{draw[0], draw[1]}];
  }
  CHECK(counts.size() == 45);
  for (const auto& [pair, count] : counts)
    CHECK(std::abs(static_cast<double>(count) - trials * p_pair) <= 3.0 * sigma);
}

TEST_CASE("feature ranking and subset invariants") {
  FeatureRanking good{{2, 0, 1}};
  CHECK(good.is_permutation());
  FeatureRanking repeated{{2, 0, 2}};
  CHECK_FALSE(repeated.is_permutation());
  FeatureRanking out_of_range{{0, 1, 3}};
  CHECK_FALSE(out_of_range.is_permutation());

  const FeatureSubset top = FeatureSubset::top_of(good, 2);
  CHECK(top.members == std::vector<FeatureIndex>{0, 2});
  CHECK(top.contains(2));
  CHECK_FALSE(top.contains(1));
}

TEST_CASE("simulator params validation") {
  SimulatorParams ok{2000, 20, 60, 0.7};
  CHECK_NOTHROW(ok.validate());
  CHECK_THROWS_AS((SimulatorParams{10, 0, 4, 0.5}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SimulatorParams{10, 5, 4, 0.5}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SimulatorParams{10, 2, 11, 0.5}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SimulatorParams{10, 2, 4, 1.5}.validate()), std::invalid_argument);
}

TEST_CASE("execution counter accumulates atomically") {
  ExecutionCounter counter;
  counter.add_real();
  counter.add_real(4);
  counter.add_simulated(7);
  const auto snap = counter.snapshot();
  CHECK(snap.real_runs == 5);
  CHECK(snap.simulated_runs == 7);
}
