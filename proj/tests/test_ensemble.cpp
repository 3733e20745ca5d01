#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "stabsim/ensemble.hpp"
#include "stabsim/sampling.hpp"
#include "test_util.hpp"

using namespace stabsim;

namespace {

FeatureRanking rank_of(std::initializer_list<FeatureIndex> order) {
  return FeatureRanking{std::vector<FeatureIndex>(order)};
}

}  // namespace

TEST_CASE("mean_rank_aggregate hand oracles") {
  // single ranking: its top prefix
  const std::vector<FeatureRanking> single{rank_of({2, 0, 1})};
  CHECK(mean_rank_aggregate(single, 2).members == std::vector<FeatureIndex>{0, 2});

  // opposite rankings tie every feature at mean rank 2; index rule gives {0}
  const std::vector<FeatureRanking> symmetric{rank_of({0, 1, 2}), rank_of({2, 1, 0})};
  CHECK(mean_rank_aggregate(symmetric, 1).members == std::vector<FeatureIndex>{0});

  // mean ranks 0: 4/3, 1: 7/3, 2: 7/3 -> {0, 1} by the tie rule
  const std::vector<FeatureRanking> three{rank_of({0, 1, 2}), rank_of({0, 2, 1}),
                                          rank_of({1, 0, 2})};
  CHECK(mean_rank_aggregate(three, 2).members == std::vector<FeatureIndex>{0, 1});
}

TEST_CASE("mean_rank_aggregate argument errors") {
  const std::vector<FeatureRanking> none;
  CHECK_THROWS_AS(mean_rank_aggregate(none, 1), std::invalid_argument);
  const std::vector<FeatureRanking> ragged{rank_of({0, 1, 2}), rank_of({1, 0})};
  CHECK_THROWS_AS(mean_rank_aggregate(ragged, 1), std::invalid_argument);
  const std::vector<FeatureRanking> ok{rank_of({0, 1, 2})};
  CHECK_THROWS_AS(mean_rank_aggregate(ok, 4), std::invalid_argument);
}

TEST_CASE("aggregation is invariant under input order and replication") {
  RngStream rng = make_stream(401, 0);
  for (int round = 0; round < 50; ++round) {
    const std::size_t n_feature = 3 + rng.uniform_below(20);
    const std::size_t n_target = 1 + rng.uniform_below(n_feature);
    std::vector<FeatureRanking> rankings;
    const std::size_t m = 2 + rng.uniform_below(6);
    for (std::size_t i = 0; i < m; ++i) rankings.push_back(uniform_rank(n_feature, rng));

    const FeatureSubset base = mean_rank_aggregate(rankings, n_target);

    std::vector<FeatureRanking> shuffled = rankings;
    for (std::size_t i = 0; i + 1 < shuffled.size(); ++i) {
      const std::size_t j = i + rng.uniform_below(shuffled.size() - i);
      std::swap(shuffled[i], shuffled[j]);
    }
    CHECK(mean_rank_aggregate(shuffled, n_target).members == base.members);

    std::vector<FeatureRanking> doubled = rankings;
    doubled.insert(doubled.end(), rankings.begin(), rankings.end());
    CHECK(mean_rank_aggregate(doubled, n_target).members == base.members);

    // output invariants
    CHECK(base.size() == n_target);
    for (FeatureIndex f : base.members) CHECK(f < n_feature);
    CHECK(std::is_sorted(base.members.begin(), base.members.end()));
  }
}

TEST_CASE("run_simulated_ensemble degenerate p=1 with n_useful=n_target") {
  SimulatorParams params{50, 4, 4, 1.0};
  const EnsembleConfig config{7, 4};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream rng = make_stream(402, seed);
    CHECK(run_simulated_ensemble(params, config, rng).members ==
          std::vector<FeatureIndex>{0, 1, 2, 3});
  }
}

TEST_CASE("single-member simulated ensemble equals one selector draw") {
  SimulatorParams params{100, 10, 30, 0.6};
  const EnsembleConfig config{1, 10};
  RngStream rng = make_stream(403, 0);
  const FeatureSubset ensemble = run_simulated_ensemble(params, config, rng);

  RngStream manual = make_stream(403, 0).derive(0);
  const auto s_m = sample_s_m(params, manual);
  const FeatureRanking ranking = simulated_rank(params, s_m, manual);
  CHECK(ensemble.members == FeatureSubset::top_of(ranking, 10).members);
}

TEST_CASE("large simulated ensemble concentrates on S'") {
  SimulatorParams params{2000, 20, 60, 0.7};
  const EnsembleConfig config{50, 20};
  std::size_t in_s_prime = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RngStream rng = make_stream(404, seed);
    for (FeatureIndex f : run_simulated_ensemble(params, config, rng).members)
      if (f < 60) ++in_s_prime;
  }
  CHECK(in_s_prime >= 90);  // at least 90% of 5*20 selected features
}

TEST_CASE("ensemble counters account simulated and real runs") {
  SimulatorParams params{200, 5, 20, 0.5};
  const EnsembleConfig config{9, 5};
  ExecutionCounter counter;
  RngStream rng = make_stream(405, 0);
  run_simulated_ensemble(params, config, rng, &counter);
  CHECK(counter.snapshot().simulated_runs == 9);

  RngStream data_rng = make_stream(405, 1);
  const Dataset d = test_util::separable_toy(20, 4, data_rng);
  const auto rows = test_util::all_rows(d);
  ForestConfig fconfig;
  fconfig.n_tree = 5;
  ExecutionCounter real_counter;
  RngStream real_rng = make_stream(405, 2);
  run_real_ensemble(d, rows, fconfig, EnsembleConfig{6, 2}, real_rng, real_counter);
  CHECK(real_counter.snapshot().real_runs == 6);
}

TEST_CASE("single-member real ensemble equals one real_rank top") {
  RngStream data_rng = make_stream(406, 0);
  const Dataset d = test_util::separable_toy(20, 4, data_rng);
  const auto rows = test_util::all_rows(d);
  ForestConfig fconfig;
  fconfig.n_tree = 8;

  ExecutionCounter c1;
  RngStream rng = make_stream(406, 1);
  const FeatureSubset ensemble = run_real_ensemble(d, rows, fconfig, EnsembleConfig{1, 2}, rng, c1);

  ExecutionCounter c2;
  RngStream manual = make_stream(406, 1).derive(0);
  const FeatureRanking ranking = real_rank(d, rows, fconfig, manual, c2);
  CHECK(ensemble.members == FeatureSubset::top_of(ranking, 2).members);
}

TEST_CASE("real ensemble keeps a strong informative feature") {
  SynthConfig config{.n_sample = 40, .n_feature = 25, .n_informative = 1, .n_class = 2,
                     .noise_level = 1.0, .discretize_levels = std::nullopt};
  ForestConfig fconfig;
  fconfig.n_tree = 8;
  const EnsembleConfig econfig{10, 5};
  int containing = 0;
  for (int rep = 0; rep < 100; ++rep) {
    RngStream rng = make_stream(407, static_cast<std::uint64_t>(rep));
    const Dataset d = synth_generate(config, rng);
    const auto rows = test_util::all_rows(d);
    ExecutionCounter counter;
    RngStream run_rng = rng.derive(1);
    if (run_real_ensemble(d, rows, fconfig, econfig, run_rng, counter).contains(0)) ++containing;
  }
  CHECK(containing >= 90);
}

TEST_CASE("ensembles are worker-count invariant") {
  SimulatorParams params{500, 10, 40, 0.6};
  const EnsembleConfig config{16, 10};
  RngStream serial = make_stream(408, 0);
  RngStream parallel = make_stream(408, 0);
  CHECK(run_simulated_ensemble(params, config, serial).members ==
        run_simulated_ensemble(params, config, parallel, nullptr, 4).members);
}
