#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stabsim/rng.hpp"
#include "stabsim/types.hpp"

namespace stabsim {

enum class FeatureKind { discrete, continuous };

/// Labeled tabular data. Immutable after load; safe for concurrent reads.
struct Dataset {
  std::size_t n_sample = 0;
  std::size_t n_feature = 0;
  std::vector<double> features;  // row-major, n_sample x n_feature
  std::vector<int> labels;       // re-encoded to 0..n_class-1
  int n_class = 0;
  FeatureKind feature_kind = FeatureKind::continuous;
  std::vector<std::string> label_names;    // original labels, first-appearance order
  std::vector<std::string> feature_names;  // header names or f0..f{n-1}
  std::string label_column_name = "label";

  double at(std::size_t row, std::size_t col) const {
    return features[row * n_feature + col];
  }
  std::span<const double> row(std::size_t r) const {
    return {features.data() + r * n_feature, n_feature};
  }
};

enum class CsvErrorKind {
  missing_file,
  ragged_row,
  non_numeric,
  unknown_label_column,
  missing_value,
  empty_input,
};

class CsvError : public std::runtime_error {
 public:
  CsvError(CsvErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  CsvErrorKind kind() const { return kind_; }

 private:
  CsvErrorKind kind_;
};

/// Loads a CSV file (UTF-8, comma separators, decimal-point floats).
/// label_column is a header name or a 0-based column index given as digits.
/// Labels are re-encoded to 0..n_class-1 in first-appearance order.
/// feature_kind is discrete iff every value is integral and every column has
/// at most 10 distinct values.
Dataset load_csv(const std::string& path, const std::string& label_column, bool has_header);

/// Writes the dataset back out; load_csv(save_csv(d)) reproduces d.
void save_csv(const Dataset& dataset, const std::string& path);

/// Synthetic dataset generator: the first n_informative columns carry
/// class-dependent means (separation at least twice the noise level), the
/// rest are label-independent noise. Labels are balanced (row i gets class
/// i mod n_class).
struct SynthConfig {
  std::size_t n_sample = 0;
  std::size_t n_feature = 0;
  std::size_t n_informative = 0;
  int n_class = 2;
  double noise_level = 1.0;
  std::optional<int> discretize_levels;

  void validate() const;
};

Dataset synth_generate(const SynthConfig& config, RngStream& rng);

/// Dataset with only the given feature columns (order given by `features`).
Dataset select_features(const Dataset& dataset, std::span<const FeatureIndex> features);

/// Leave-one-out splits: test is one row; the rest is divided into two
/// near-equal halves by alternating assignment after a seeded shuffle.
struct Split {
  std::vector<std::size_t> train1;  // feature-selection half
  std::vector<std::size_t> train2;  // predictor-training half
  std::vector<std::size_t> test;
};

std::vector<Split> leave_one_out_splits(const Dataset& dataset, RngStream& rng);

}  // namespace stabsim
