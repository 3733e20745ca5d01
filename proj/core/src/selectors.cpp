#include "stabsim/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "stabsim/sampling.hpp"

namespace stabsim {

std::vector<FeatureIndex> sample_s_m(const SimulatorParams& params, RngStream& rng) {
  params.validate();
  auto s_m = sample_index_subset(params.n_useful, params.n_target, rng);
  std::sort(s_m.begin(), s_m.end());
  return s_m;
}

FeatureRanking simulated_rank(const SimulatorParams& params,
                              std::span<const FeatureIndex> s_m, RngStream& rng) {
  params.validate();
  if (s_m.size() != params.n_target)
    throw std::invalid_argument("simulated_rank: |s_m| must equal n_target");

  std::vector<FeatureIndex> members(s_m.begin(), s_m.end());
  std::vector<bool> is_member(params.n_feature, false);
  for (FeatureIndex f : members) {
    if (f >= params.n_feature) throw std::invalid_argument("simulated_rank: s_m index out of range");
    is_member[f] = true;
  }
  std::vector<FeatureIndex> others;
  others.reserve(params.n_feature - members.size());
  for (std::size_t f = 0; f < params.n_feature; ++f)
    if (!is_member[f]) others.push_back(static_cast<FeatureIndex>(f));

  FeatureRanking ranking;
  ranking.order.reserve(params.n_feature);
  auto draw_from = [&rng](std::vector<FeatureIndex>& pool) {
    const std::size_t i = static_cast<std::size_t>(rng.uniform_below(pool.size()));
    const FeatureIndex f = pool[i];
    pool[i] = pool.back();
    pool.pop_back();
    return f;
  };
  while (ranking.order.size() < params.n_feature) {
    bool from_members = rng.bernoulli(params.p);
    if (from_members && members.empty()) from_members = false;
    else if (!from_members && others.empty()) from_members = true;
    ranking.order.push_back(draw_from(from_members ? members : others));
  }
  return ranking;
}

FeatureRanking uniform_rank(std::size_t n_feature, RngStream& rng) {
  if (n_feature == 0) throw std::invalid_argument("uniform_rank: n_feature must be >= 1");
  FeatureRanking ranking;
  ranking.order.resize(n_feature);
  std::iota(ranking.order.begin(), ranking.order.end(), FeatureIndex{0});
  shuffle(std::span<FeatureIndex>(ranking.order), rng);
  return ranking;
}

FeatureRanking real_rank(const Dataset& dataset, std::span<const std::size_t> rows,
                         const ForestConfig& config, RngStream& rng,
                         ExecutionCounter& counter, unsigned workers) {
  std::vector<std::size_t> fit_rows;
  if (config.row_subsample) {
    const std::size_t k = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(config.subsample_fraction * static_cast<double>(rows.size()))));
    fit_rows.resize(k);
    RngStream bag_rng = rng.derive(0);
    for (auto& r : fit_rows)
      r = rows[static_cast<std::size_t>(bag_rng.uniform_below(rows.size()))];
  } else {
    fit_rows.assign(rows.begin(), rows.end());
  }

  RngStream fit_rng = rng.derive(1);
  const Forest forest = fit_forest(dataset, fit_rows, config, fit_rng, workers);
  const std::vector<double> importance = gini_importance(forest);

  FeatureRanking ranking;
  ranking.order.resize(dataset.n_feature);
  std::iota(ranking.order.begin(), ranking.order.end(), FeatureIndex{0});
  std::stable_sort(ranking.order.begin(), ranking.order.end(),
                   [&](FeatureIndex a, FeatureIndex b) { return importance[a] > importance[b]; });
  counter.add_real();
  return ranking;
}

RealForestSelector::RealForestSelector(const Dataset& dataset, std::vector<std::size_t> rows,
                                       ForestConfig config, ExecutionCounter& counter,
                                       unsigned fit_workers)
    : dataset_(dataset), rows_(std::move(rows)), config_(config), counter_(counter),
      fit_workers_(fit_workers) {
  if (rows_.empty()) {
    rows_.resize(dataset.n_sample);
    std::iota(rows_.begin(), rows_.end(), std::size_t{0});
  }
}

FeatureRanking RealForestSelector::rank(RngStream& rng) {
  return real_rank(dataset_, rows_, config_, rng, counter_, fit_workers_);
}

std::string RealForestSelector::describe() const {
  std::ostringstream out;
  out << "random-forest-gini(n_tree=" << config_.n_tree
      << ", mtry=" << config_.resolve_mtry(dataset_.n_feature)
      << ", max_depth="
      << (config_.max_depth ? std::to_string(*config_.max_depth) : std::string("unbounded"))
      << ", min_samples_split=" << config_.min_samples_split
      << ", bootstrap=" << (config_.bootstrap ? "on" : "off")
      << ", row_subsample="
      << (config_.row_subsample ? std::to_string(config_.subsample_fraction) : std::string("off"))
      << ")";
  return out.str();
}

FeatureRanking SimulatedSelector::rank(RngStream& rng) {
  const auto s_m = sample_s_m(params_, rng);
  FeatureRanking ranking = simulated_rank(params_, s_m, rng);
  if (counter_) counter_->add_simulated();
  return ranking;
}

std::string SimulatedSelector::describe() const {
  std::ostringstream out;
  out << "simulated(n_feature=" << params_.n_feature << ", n_target=" << params_.n_target
      << ", n_useful=" << params_.n_useful << ", p=" << params_.p << ")";
  return out.str();
}

}  // namespace stabsim
