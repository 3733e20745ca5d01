#include "stabsim/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "stabsim/sampling.hpp"

namespace stabsim {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_index(const std::string& s, std::size_t& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

FeatureKind infer_feature_kind(const Dataset& d) {
  for (double v : d.features)
    if (!(std::isfinite(v) && v == std::floor(v))) return FeatureKind::continuous;
  for (std::size_t c = 0; c < d.n_feature; ++c) {
    std::unordered_set<double> distinct;
    for (std::size_t r = 0; r < d.n_sample; ++r) {
      distinct.insert(d.at(r, c));
      if (distinct.size() > 10) return FeatureKind::continuous;
    }
  }
  return FeatureKind::discrete;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column, bool has_header) {
  std::ifstream in(path);
  if (!in) throw CsvError(CsvErrorKind::missing_file, "cannot open file: " + path);

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) lines.push_back(line);
  }
  if (lines.empty()) throw CsvError(CsvErrorKind::empty_input, "empty CSV: " + path);

  std::vector<std::string> header;
  std::size_t first_data = 0;
  if (has_header) {
    header = split_line(lines[0]);
    first_data = 1;
    if (lines.size() == first_data)
      throw CsvError(CsvErrorKind::empty_input, "CSV has a header but no data rows: " + path);
  }

  const std::size_t n_col = split_line(lines[first_data]).size();
  if (has_header && header.size() != n_col)
    throw CsvError(CsvErrorKind::ragged_row, "header width differs from data width");

  // Resolve the label column: header name first, then digits as 0-based index.
  std::size_t label_idx = n_col;
  if (has_header) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (trim(header[i]) == label_column) label_idx = i;
  }
  if (label_idx == n_col) {
    std::size_t idx;
    if (parse_index(trim(label_column), idx) && idx < n_col)
      label_idx = idx;
    else
      throw CsvError(CsvErrorKind::unknown_label_column,
                     "unknown label column: " + label_column);
  }

  Dataset d;
  d.n_feature = n_col - 1;
  d.label_column_name = has_header ? trim(header[label_idx]) : "label";
  for (std::size_t i = 0; i < n_col; ++i) {
    if (i == label_idx) continue;
    d.feature_names.push_back(has_header ? trim(header[i]) : "f" + std::to_string(d.feature_names.size()));
  }

  std::unordered_map<std::string, int> label_codes;
  for (std::size_t li = first_data; li < lines.size(); ++li) {
    const auto cells = split_line(lines[li]);
    const std::size_t row = li - first_data;
    if (cells.size() != n_col)
      throw CsvError(CsvErrorKind::ragged_row,
                     "ragged row " + std::to_string(row) + ": expected " +
                         std::to_string(n_col) + " cells, got " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < n_col; ++c) {
      const std::string cell = trim(cells[c]);
      if (c == label_idx) {
        if (cell.empty())
          throw CsvError(CsvErrorKind::missing_value,
                         "missing value at (" + std::to_string(row) + ", " + std::to_string(c) + ")");
        auto [it, inserted] = label_codes.try_emplace(cell, static_cast<int>(d.label_names.size()));
        if (inserted) d.label_names.push_back(cell);
        d.labels.push_back(it->second);
        continue;
      }
      if (cell.empty())
        throw CsvError(CsvErrorKind::missing_value,
                       "missing value at (" + std::to_string(row) + ", " + std::to_string(c) + ")");
      double v;
      if (!parse_double(cell, v))
        throw CsvError(CsvErrorKind::non_numeric,
                       "non-numeric feature cell at (" + std::to_string(row) + ", " +
                           std::to_string(c) + "): '" + cell + "'");
      d.features.push_back(v);
    }
    ++d.n_sample;
  }

  d.n_class = static_cast<int>(d.label_names.size());
  if (d.n_class < 2)
    throw CsvError(CsvErrorKind::empty_input, "dataset needs at least 2 label classes");
  d.feature_kind = infer_feature_kind(d);
  return d;
}

void save_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CsvError(CsvErrorKind::missing_file, "cannot write file: " + path);
  for (std::size_t c = 0; c < dataset.n_feature; ++c) out << dataset.feature_names[c] << ',';
  out << dataset.label_column_name << '\n';
  char buf[64];
  for (std::size_t r = 0; r < dataset.n_sample; ++r) {
    for (std::size_t c = 0; c < dataset.n_feature; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", dataset.at(r, c));
      out << buf << ',';
    }
    out << dataset.label_names[static_cast<std::size_t>(dataset.labels[r])] << '\n';
  }
}

void SynthConfig::validate() const {
  if (n_sample == 0 || n_feature == 0)
    throw std::invalid_argument("SynthConfig: n_sample and n_feature must be positive");
  if (n_informative > n_feature)
    throw std::invalid_argument("SynthConfig: n_informative exceeds n_feature");
  if (n_class < 2) throw std::invalid_argument("SynthConfig: n_class must be at least 2");
  if (!(noise_level >= 0.0)) throw std::invalid_argument("SynthConfig: noise_level must be >= 0");
  if (discretize_levels && *discretize_levels < 2)
    throw std::invalid_argument("SynthConfig: discretize_levels must be at least 2");
}

Dataset synth_generate(const SynthConfig& config, RngStream& rng) {
  config.validate();
  Dataset d;
  d.n_sample = config.n_sample;
  d.n_feature = config.n_feature;
  d.n_class = config.n_class;
  d.features.resize(d.n_sample * d.n_feature);
  d.labels.resize(d.n_sample);
  for (std::size_t r = 0; r < d.n_sample; ++r)
    d.labels[r] = static_cast<int>(r % static_cast<std::size_t>(config.n_class));
  for (int k = 0; k < d.n_class; ++k) d.label_names.push_back("c" + std::to_string(k));
  for (std::size_t c = 0; c < d.n_feature; ++c) d.feature_names.push_back("f" + std::to_string(c));

  const double separation = std::max(2.0 * config.noise_level, 1.0);
  for (std::size_t r = 0; r < d.n_sample; ++r) {
    for (std::size_t c = 0; c < d.n_feature; ++c) {
      double v;
      if (c < config.n_informative)
        v = separation * d.labels[r] + config.noise_level * rng.next_gaussian();
      else
        v = rng.next_gaussian();
      d.features[r * d.n_feature + c] = v;
    }
  }

  if (config.discretize_levels) {
    const int levels = *config.discretize_levels;
    std::vector<double> column(d.n_sample);
    for (std::size_t c = 0; c < d.n_feature; ++c) {
      for (std::size_t r = 0; r < d.n_sample; ++r) column[r] = d.at(r, c);
      std::sort(column.begin(), column.end());
      std::vector<double> edges;
      for (int k = 1; k < levels; ++k) {
        const std::size_t pos = std::min(d.n_sample - 1, (d.n_sample * static_cast<std::size_t>(k)) / static_cast<std::size_t>(levels));
        edges.push_back(column[pos]);
      }
      for (std::size_t r = 0; r < d.n_sample; ++r) {
        const double v = d.at(r, c);
        int level = 0;
        for (double e : edges)
          if (v >= e) ++level;
        // symmetric integer coding: 3 levels -> {-2, 0, 2}
        d.features[r * d.n_feature + c] = static_cast<double>(2 * level - (levels - 1));
      }
    }
  }

  d.feature_kind = infer_feature_kind(d);
  return d;
}

Dataset select_features(const Dataset& dataset, std::span<const FeatureIndex> features) {
  Dataset d;
  d.n_sample = dataset.n_sample;
  d.n_feature = features.size();
  d.labels = dataset.labels;
  d.n_class = dataset.n_class;
  d.label_names = dataset.label_names;
  d.label_column_name = dataset.label_column_name;
  d.feature_kind = dataset.feature_kind;
  d.features.resize(d.n_sample * d.n_feature);
  for (FeatureIndex f : features)
    if (f >= dataset.n_feature)
      throw std::invalid_argument("select_features: feature index out of range");
  for (std::size_t r = 0; r < d.n_sample; ++r)
    for (std::size_t c = 0; c < d.n_feature; ++c)
      d.features[r * d.n_feature + c] = dataset.at(r, features[c]);
  for (FeatureIndex f : features) d.feature_names.push_back(dataset.feature_names[f]);
  return d;
}

std::vector<Split> leave_one_out_splits(const Dataset& dataset, RngStream& rng) {
  if (dataset.n_sample < 3)
    throw std::invalid_argument("leave_one_out_splits: need at least 3 samples");
  std::vector<Split> splits(dataset.n_sample);
  for (std::size_t t = 0; t < dataset.n_sample; ++t) {
    std::vector<std::size_t> rest;
    rest.reserve(dataset.n_sample - 1);
    for (std::size_t r = 0; r < dataset.n_sample; ++r)
      if (r != t) rest.push_back(r);
    RngStream split_rng = rng.derive(t);
    shuffle(std::span<std::size_t>(rest), split_rng);
    Split s;
    s.test.push_back(t);
    for (std::size_t i = 0; i < rest.size(); ++i)
      (i % 2 == 0 ? s.train1 : s.train2).push_back(rest[i]);
    splits[t] = std::move(s);
  }
  return splits;
}

}  // namespace stabsim
