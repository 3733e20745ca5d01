#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stabsim/dataset.hpp"
#include "stabsim/rng.hpp"
#include "stabsim/types.hpp"

namespace stabsim {

struct ForestConfig {
  std::size_t n_tree = 100;
  /// Candidate features per split; defaults to floor(sqrt(n_feature)).
  std::optional<std::size_t> mtry;
  /// mtry as a fraction of n_feature; overrides mtry when set.
  std::optional<double> normalized_mtry;
  std::optional<std::size_t> max_depth;  // unbounded when unset
  std::size_t min_samples_split = 2;
  bool bootstrap = true;
  /// Row bagging for weak selectors: when row_subsample is on, each weak
  /// selector draws round(subsample_fraction * |rows|) rows with replacement
  /// before fitting. Off by default; forest-internal bootstrap randomness is
  /// then the only source of weak-selector variation.
  double subsample_fraction = 1.0;
  bool row_subsample = false;

  std::size_t resolve_mtry(std::size_t n_feature) const;
  void validate(std::size_t n_feature) const;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // left child takes rows with value < threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double impurity = 0.0;
  std::size_t n_samples = 0;
  std::vector<std::size_t> class_counts;  // populated at leaves

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  bool operator==(const Tree&) const = default;
};

struct Forest {
  std::vector<Tree> trees;
  std::size_t n_feature = 0;
  int n_class = 0;
  bool operator==(const Forest&) const = default;
};

/// Grows n_tree Gini trees on the given rows. Each tree gets its own derived
/// stream, so results are identical for any worker count.
/// Throws std::runtime_error if the rows carry fewer than two classes.
Forest fit_forest(const Dataset& dataset, std::span<const std::size_t> rows,
                  const ForestConfig& config, RngStream& rng, unsigned workers = 1);

/// Mean-decrease-in-impurity importances: per tree, every split contributes
/// its weighted impurity decrease to the split feature; tree vectors are
/// normalized to sum 1, then averaged over trees that have splits. Features
/// never split score 0; the result sums to 1 whenever any split exists.
std::vector<double> gini_importance(const Forest& forest);

/// Majority vote over per-tree leaf argmaxes; ties go to the lower class.
int predict(const Forest& forest, std::span<const double> row);

/// Leave-one-out accuracy of a forest trained on each split's train2 rows,
/// restricted to the selected feature columns.
double loo_accuracy(const Dataset& dataset, const FeatureSubset& selected,
                    const ForestConfig& config, RngStream& rng, unsigned workers = 1);

}  // namespace stabsim
