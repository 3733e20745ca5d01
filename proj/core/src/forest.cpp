#include "stabsim/forest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stabsim/parallel.hpp"
#include "stabsim/sampling.hpp"

namespace stabsim {

std::size_t ForestConfig::resolve_mtry(std::size_t n_feature) const {
  std::size_t m;
  if (normalized_mtry)
    m = static_cast<std::size_t>(std::llround(*normalized_mtry * static_cast<double>(n_feature)));
  else if (mtry)
    m = *mtry;
  else
    m = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_feature))));
  return std::clamp<std::size_t>(m, 1, n_feature);
}

void ForestConfig::validate(std::size_t n_feature) const {
  if (n_tree == 0) throw std::invalid_argument("ForestConfig: n_tree must be >= 1");
  if (mtry && (*mtry == 0 || *mtry > n_feature))
    throw std::invalid_argument("ForestConfig: mtry out of range");
  if (normalized_mtry && !(*normalized_mtry > 0.0 && *normalized_mtry <= 1.0))
    throw std::invalid_argument("ForestConfig: normalized_mtry out of range");
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0))
    throw std::invalid_argument("ForestConfig: subsample_fraction out of range");
  if (min_samples_split < 2)
    throw std::invalid_argument("ForestConfig: min_samples_split must be >= 2");
}

namespace {

double gini(std::span<const std::size_t> counts, std::size_t total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

struct BestSplit {
  double gain = 0.0;
  std::int32_t feature = -1;
  double threshold = 0.0;
  bool found = false;

  // Strictly larger gain wins; exact ties go to the lower feature index,
  // then the lower threshold.
  bool beats(const BestSplit& other) const {
    if (!other.found) return found;
    if (gain != other.gain) return gain > other.gain;
    if (feature != other.feature) return feature < other.feature;
    return threshold < other.threshold;
  }
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const ForestConfig& config, std::size_t mtry)
      : data_(data), config_(config), mtry_(mtry),
        n_class_(static_cast<std::size_t>(data.n_class)) {}

  Tree build(std::vector<std::size_t> samples, RngStream& rng) {
    samples_ = std::move(samples);
    tree_.nodes.clear();
    grow(0, samples_.size(), 0, rng);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::size_t begin, std::size_t end, std::size_t depth, RngStream& rng) {
    const std::size_t n = end - begin;
    std::vector<std::size_t> counts(n_class_, 0);
    for (std::size_t i = begin; i < end; ++i) ++counts[static_cast<std::size_t>(data_.labels[samples_[i]])];

    TreeNode node;
    node.n_samples = n;
    node.impurity = gini(counts, n);

    const bool pure = std::count(counts.begin(), counts.end(), std::size_t{0}) >=
                      static_cast<std::ptrdiff_t>(n_class_ - 1);
    const bool depth_capped = config_.max_depth && depth >= *config_.max_depth;
    if (pure || depth_capped || n < config_.min_samples_split)
      return make_leaf(std::move(node), std::move(counts));

    const BestSplit best = find_best_split(begin, end, node.impurity, counts, rng);
    if (!best.found || best.gain <= 0.0)
      return make_leaf(std::move(node), std::move(counts));

    // Partition: rows with value < threshold go left.
    const auto mid_it = std::stable_partition(
        samples_.begin() + static_cast<std::ptrdiff_t>(begin),
        samples_.begin() + static_cast<std::ptrdiff_t>(end),
        [&](std::size_t row) {
          return data_.at(row, static_cast<std::size_t>(best.feature)) < best.threshold;
        });
    const std::size_t mid = static_cast<std::size_t>(mid_it - samples_.begin());

    node.feature = best.feature;
    node.threshold = best.threshold;
    const std::int32_t id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back(std::move(node));
    const std::int32_t left = grow(begin, mid, depth + 1, rng);
    const std::int32_t right = grow(mid, end, depth + 1, rng);
    tree_.nodes[static_cast<std::size_t>(id)].left = left;
    tree_.nodes[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  std::int32_t make_leaf(TreeNode&& node, std::vector<std::size_t>&& counts) {
    node.class_counts = std::move(counts);
    tree_.nodes.push_back(std::move(node));
    return static_cast<std::int32_t>(tree_.nodes.size() - 1);
  }

  BestSplit find_best_split(std::size_t begin, std::size_t end, double parent_impurity,
                            std::span<const std::size_t> parent_counts, RngStream& rng) {
    const std::size_t n = end - begin;
    const auto candidates = sample_index_subset(data_.n_feature, mtry_, rng);

    BestSplit best;
    std::vector<std::pair<double, int>> column(n);
    std::vector<std::size_t> left_counts(n_class_);
    for (const FeatureIndex feature : candidates) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t row = samples_[begin + i];
        column[i] = {data_.at(row, feature), data_.labels[row]};
      }
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;

      std::fill(left_counts.begin(), left_counts.end(), 0);
      std::size_t n_left = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        ++left_counts[static_cast<std::size_t>(column[i].second)];
        ++n_left;
        const double v = column[i].first;
        const double next = column[i + 1].first;
        if (v == next) continue;
        double threshold = v + (next - v) / 2.0;
        if (!(threshold > v)) threshold = next;  // adjacent doubles

        double left_sq = 0.0, right_sq = 0.0;
        const std::size_t n_right = n - n_left;
        for (std::size_t k = 0; k < n_class_; ++k) {
          const double cl = static_cast<double>(left_counts[k]);
          const double cr = static_cast<double>(parent_counts[k] - left_counts[k]);
          left_sq += cl * cl;
          right_sq += cr * cr;
        }
        const double imp_left = 1.0 - left_sq / (static_cast<double>(n_left) * static_cast<double>(n_left));
        const double imp_right = 1.0 - right_sq / (static_cast<double>(n_right) * static_cast<double>(n_right));
        const double wl = static_cast<double>(n_left) / static_cast<double>(n);
        const double wr = static_cast<double>(n_right) / static_cast<double>(n);
        BestSplit cand{parent_impurity - wl * imp_left - wr * imp_right,
                       static_cast<std::int32_t>(feature), threshold, true};
        if (cand.beats(best)) best = cand;
      }
    }
    return best;
  }

  const Dataset& data_;
  const ForestConfig& config_;
  std::size_t mtry_;
  std::size_t n_class_;
  std::vector<std::size_t> samples_;
  Tree tree_;
};

}  // namespace

Forest fit_forest(const Dataset& dataset, std::span<const std::size_t> rows,
                  const ForestConfig& config, RngStream& rng, unsigned workers) {
  config.validate(dataset.n_feature);
  if (rows.size() < config.min_samples_split)
    throw std::invalid_argument("fit_forest: too few training rows");
  int first_class = dataset.labels[rows.front()];
  bool multi_class = false;
  for (std::size_t r : rows)
    if (dataset.labels[r] != first_class) { multi_class = true; break; }
  if (!multi_class) throw std::runtime_error("fit_forest: training rows carry a single class");

  const std::size_t mtry = config.resolve_mtry(dataset.n_feature);
  Forest forest;
  forest.n_feature = dataset.n_feature;
  forest.n_class = dataset.n_class;
  forest.trees.resize(config.n_tree);

  parallel_for(config.n_tree, workers, [&](std::size_t t) {
    RngStream tree_rng = rng.derive(t);
    std::vector<std::size_t> samples;
    if (config.bootstrap) {
      samples.resize(rows.size());
      for (auto& s : samples)
        s = rows[static_cast<std::size_t>(tree_rng.uniform_below(rows.size()))];
    } else {
      samples.assign(rows.begin(), rows.end());
    }
    TreeBuilder builder(dataset, config, mtry);
    forest.trees[t] = builder.build(std::move(samples), tree_rng);
  });
  return forest;
}

std::vector<double> gini_importance(const Forest& forest) {
  std::vector<double> total(forest.n_feature, 0.0);
  std::size_t trees_with_splits = 0;
  std::vector<double> per_tree(forest.n_feature);
  for (const Tree& tree : forest.trees) {
    std::fill(per_tree.begin(), per_tree.end(), 0.0);
    double sum = 0.0;
    const double n_root = static_cast<double>(tree.nodes.empty() ? 0 : tree.nodes[0].n_samples);
    for (const TreeNode& node : tree.nodes) {
      if (node.is_leaf()) continue;
      const TreeNode& l = tree.nodes[static_cast<std::size_t>(node.left)];
      const TreeNode& r = tree.nodes[static_cast<std::size_t>(node.right)];
      const double decrease =
          (static_cast<double>(node.n_samples) * node.impurity -
           static_cast<double>(l.n_samples) * l.impurity -
           static_cast<double>(r.n_samples) * r.impurity) /
          n_root;
      per_tree[static_cast<std::size_t>(node.feature)] += decrease;
      sum += decrease;
    }
    if (sum > 0.0) {
      ++trees_with_splits;
      for (std::size_t f = 0; f < forest.n_feature; ++f) total[f] += per_tree[f] / sum;
    }
  }
  if (trees_with_splits > 0)
    for (double& v : total) v /= static_cast<double>(trees_with_splits);
  return total;
}

namespace {

int tree_predict(const Tree& tree, std::span<const double> row) {
  std::size_t node_id = 0;
  while (!tree.nodes[node_id].is_leaf()) {
    const TreeNode& node = tree.nodes[node_id];
    node_id = static_cast<std::size_t>(
        row[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right);
  }
  const auto& counts = tree.nodes[node_id].class_counts;
  std::size_t best = 0;
  for (std::size_t k = 1; k < counts.size(); ++k)
    if (counts[k] > counts[best]) best = k;
  return static_cast<int>(best);
}

}  // namespace

int predict(const Forest& forest, std::span<const double> row) {
  if (row.size() != forest.n_feature)
    throw std::invalid_argument("predict: row length does not match n_feature");
  std::vector<std::size_t> votes(static_cast<std::size_t>(forest.n_class), 0);
  for (const Tree& tree : forest.trees) ++votes[static_cast<std::size_t>(tree_predict(tree, row))];
  std::size_t best = 0;
  for (std::size_t k = 1; k < votes.size(); ++k)
    if (votes[k] > votes[best]) best = k;
  return static_cast<int>(best);
}

double loo_accuracy(const Dataset& dataset, const FeatureSubset& selected,
                    const ForestConfig& config, RngStream& rng, unsigned workers) {
  const Dataset reduced = select_features(dataset, selected.members);
  RngStream split_rng = rng.derive(0);
  const auto splits = leave_one_out_splits(reduced, split_rng);
  const RngStream fit_root = rng.derive(1);

  std::vector<int> correct(splits.size(), 0);
  parallel_for(splits.size(), workers, [&](std::size_t t) {
    RngStream fit_rng = fit_root.derive(t);
    const Forest forest = fit_forest(reduced, splits[t].train2, config, fit_rng);
    const std::size_t test_row = splits[t].test.front();
    correct[t] = predict(forest, reduced.row(test_row)) == reduced.labels[test_row] ? 1 : 0;
  });
  std::size_t hits = 0;
  for (int c : correct) hits += static_cast<std::size_t>(c);
  return static_cast<double>(hits) / static_cast<double>(splits.size());
}

}  // namespace stabsim
