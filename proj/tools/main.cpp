#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stabsim/dataset.hpp"
#include "stabsim/ensemble.hpp"
#include "stabsim/estimation.hpp"
#include "stabsim/parallel.hpp"
#include "stabsim/stability.hpp"
#include "stabsim/theory.hpp"
#include "stabsim/version.hpp"

namespace {

using namespace stabsim;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write output file: " + path);
  out << body;
}

// Dataset source shared by the data-driven subcommands: either a CSV file or
// the synthetic generator (flags or a JSON config file).
struct DatasetOptions {
  std::string csv_path;
  std::string label_column = "label";
  bool no_header = false;

  std::string synth_config_path;
  SynthConfig synth{.n_sample = 60, .n_feature = 500, .n_informative = 10, .n_class = 2,
                    .noise_level = 1.0, .discretize_levels = std::nullopt};
  bool synth_requested = false;

  void add_flags(CLI::App& cmd) {
    cmd.add_option("--csv", csv_path, "dataset CSV path");
    cmd.add_option("--label", label_column, "label column name or 0-based index")
        ->capture_default_str();
    cmd.add_flag("--no-header", no_header, "the CSV has no header row");
    cmd.add_option("--synth-config", synth_config_path,
                   "JSON file with the synthetic dataset config");
    auto* synth_flag = cmd.add_flag("--synth", synth_requested, "use the synthetic generator");
    cmd.add_option("--synth-samples", synth.n_sample, "synthetic rows")->needs(synth_flag);
    cmd.add_option("--synth-features", synth.n_feature, "synthetic columns")->needs(synth_flag);
    cmd.add_option("--synth-informative", synth.n_informative, "label-correlated columns")
        ->needs(synth_flag);
    cmd.add_option("--synth-classes", synth.n_class, "synthetic class count")->needs(synth_flag);
    cmd.add_option("--synth-noise", synth.noise_level, "noise standard deviation")
        ->needs(synth_flag);
    cmd.add_option("--synth-discretize", synth.discretize_levels,
                   "quantile-bin the features into this many levels")
        ->needs(synth_flag);
  }

  Dataset resolve(RngStream& rng) const {
    const int sources = (!csv_path.empty() ? 1 : 0) + (synth_requested ? 1 : 0) +
                        (!synth_config_path.empty() ? 1 : 0);
    if (sources != 1)
      throw std::invalid_argument(
          "exactly one dataset source is required (--csv, --synth, or --synth-config)");
    if (!csv_path.empty()) return load_csv(csv_path, label_column, !no_header);
    SynthConfig config = synth;
    if (!synth_config_path.empty()) {
      std::ifstream in(synth_config_path);
      if (!in) throw std::runtime_error("cannot open synth config: " + synth_config_path);
      nlohmann::json j;
      in >> j;
      config.n_sample = j.at("n_sample").get<std::size_t>();
      config.n_feature = j.at("n_feature").get<std::size_t>();
      config.n_informative = j.value("n_informative", std::size_t{0});
      config.n_class = j.value("n_class", 2);
      config.noise_level = j.value("noise_level", 1.0);
      if (j.contains("discretize_levels") && !j["discretize_levels"].is_null())
        config.discretize_levels = j["discretize_levels"].get<int>();
    }
    RngStream synth_rng = rng.derive(0x5D);
    return synth_generate(config, synth_rng);
  }
};

struct ForestOptions {
  ForestConfig config;
  std::optional<double> subsample;

  void add_flags(CLI::App& cmd) {
    cmd.add_option("--n-tree", config.n_tree, "trees per forest")->capture_default_str();
    cmd.add_option("--mtry", config.mtry, "split candidates per node");
    cmd.add_option("--normalized-mtry", config.normalized_mtry,
                   "split candidates as a fraction of n_feature (overrides --mtry)");
    cmd.add_option("--max-depth", config.max_depth, "maximum tree depth");
    cmd.add_option("--subsample", subsample,
                   "weak-selector row bagging fraction (with replacement)");
  }

  ForestConfig resolve() const {
    ForestConfig c = config;
    if (subsample) {
      c.row_subsample = true;
      c.subsample_fraction = *subsample;
    }
    return c;
  }
};

std::string simulate_stability_csv(const std::vector<double>& p_list,
                                   const std::vector<std::size_t>& m_list,
                                   const SimulatorParams& base, std::size_t m_stability,
                                   std::uint64_t seed, unsigned workers) {
  struct Cell {
    double p;
    std::size_t m_ensemble;
    double j;
  };
  std::vector<Cell> cells;
  for (double p : p_list)
    for (std::size_t m : m_list) cells.push_back({p, m, 0.0});
  for (const Cell& cell : cells) {
    SimulatorParams params = base;
    params.p = cell.p;
    params.validate();
    EnsembleConfig{cell.m_ensemble, params.n_target}.validate();
  }

  RngStream root = make_stream(seed, 0);
  parallel_for(cells.size(), workers, [&](std::size_t i) {
    SimulatorParams params = base;
    params.p = cells[i].p;
    const EnsembleConfig config{cells[i].m_ensemble, params.n_target};
    const SubsetFactory factory = [&](RngStream& replica_rng) {
      return run_simulated_ensemble(params, config, replica_rng);
    };
    RngStream cell_rng = root.derive(i);
    cells[i].j = estimate_stability(factory, m_stability, cell_rng).j;
  });

  std::ostringstream out;
  out << "p,m_ensemble,m_stability,J,seed\n";
  for (const Cell& cell : cells)
    out << format_double(cell.p) << ',' << cell.m_ensemble << ',' << m_stability << ','
        << format_double(cell.j) << ',' << seed << '\n';
  return out.str();
}

int cmd_simulate_stability(const SimulatorParams& base, const std::vector<double>& p_list,
                           const std::vector<std::size_t>& m_list, std::size_t m_stability,
                           std::uint64_t seed, unsigned workers, const std::string& out_path) {
  const std::string csv =
      simulate_stability_csv(p_list, m_list, base, m_stability, seed, workers);
  write_text(out_path, csv);
  return kExitOk;
}

int cmd_calibrate(const DatasetOptions& data_options, const ForestOptions& forest_options,
                  CalibrationConfig calib, std::optional<std::size_t> truth_n_useful,
                  std::optional<double> truth_p, std::size_t truth_n_feature,
                  std::uint64_t seed, unsigned workers, const std::string& out_json,
                  const std::string& out_csv) {
  RngStream root = make_stream(seed, 0);
  ExecutionCounter counter;

  std::optional<Dataset> dataset;
  std::unique_ptr<BaseSelector> base;
  if (truth_n_useful || truth_p) {
    if (!(truth_n_useful && truth_p))
      throw std::invalid_argument("--truth-n-useful and --truth-p must be given together");
    if (truth_n_feature == 0)
      throw std::invalid_argument("--n-feature is required with a simulated ground truth");
    SimulatorParams truth{truth_n_feature, calib.n_target, *truth_n_useful, *truth_p};
    truth.validate();
    base = std::make_unique<SimulatedSelector>(truth, &counter);
  } else {
    RngStream data_rng = root.derive(0);
    dataset.emplace(data_options.resolve(data_rng));
    base = std::make_unique<RealForestSelector>(*dataset, std::vector<std::size_t>{},
                                                forest_options.resolve(), counter);
  }

  RngStream calib_rng = root.derive(1);
  const CalibrationReport report = full_calibration(*base, calib, calib_rng, counter, workers);

  write_text(out_json, report_to_json(report));
  if (!out_csv.empty()) write_text(out_csv, report_grid_csv(report));

  std::cerr << "real runs: " << report.real_runs << " (m_ensemble " << report.m_ensemble
            << " + " << report.stability_target_m_ensemble << " x m_stability "
            << report.m_stability << ")\n"
            << "simulated runs: " << report.simulated_runs << "\n";
  return kExitOk;
}

int cmd_theorem_check(const FirstDrawInputs& inputs, std::size_t trials, std::uint64_t seed,
                      unsigned workers) {
  const double closed = p0_closed_form(inputs);
  RngStream rng = make_stream(seed, 0);
  const double mc = p0_monte_carlo(inputs, trials, rng, workers);
  const double threshold = first_draw_threshold(inputs.n_f, inputs.n_t);
  const double se = std::sqrt(closed * (1.0 - closed) / static_cast<double>(trials));

  std::string verdict;
  if (inputs.p > threshold) verdict = "above-threshold: S' members beat the uniform rate";
  else if (inputs.p < threshold) verdict = "below-threshold: S' members trail the uniform rate";
  else verdict = "at-threshold: S' members match the uniform rate";

  const nlohmann::json j{
      {"schema", "stabsim-theorem-check/1"},
      {"tool_version", kToolVersion},
      {"rng", {{"family", kRngFamily}, {"master_seed", seed}}},
      {"config",
       {{"n_feature", inputs.n_f},
        {"n_target", inputs.n_t},
        {"n_useful", inputs.n_m},
        {"p", inputs.p},
        {"trials", trials}}},
      {"p0_closed_form", closed},
      {"p0_monte_carlo", mc},
      {"threshold", threshold},
      {"uniform_rate", 1.0 / static_cast<double>(inputs.n_f)},
      {"mc_consistent", std::abs(mc - closed) <= 4.0 * se},
      {"verdict", verdict},
  };
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_bench(const DatasetOptions& data_options, const ForestOptions& forest_options,
              std::size_t n_target, std::size_t n_useful, double p,
              const std::vector<std::size_t>& m_list, std::size_t m_stability,
              const std::string& mode, std::uint64_t seed, unsigned workers,
              const std::string& out_path) {
  RngStream root = make_stream(seed, 0);
  RngStream data_rng = root.derive(0);
  const Dataset dataset = data_options.resolve(data_rng);
  const ForestConfig fconfig = forest_options.resolve();
  SimulatorParams params{dataset.n_feature, n_target, n_useful, p};
  params.validate();

  std::vector<std::size_t> rows(dataset.n_sample);
  std::iota(rows.begin(), rows.end(), std::size_t{0});

  std::ostringstream out;
  out << "mode,m_ensemble,m_stability,seconds,workers\n";
  const bool run_real = mode == "both" || mode == "real";
  const bool run_simulated = mode == "both" || mode == "simulated";

  auto time_cell = [&](const SubsetFactory& factory, RngStream& rng) {
    const auto start = std::chrono::steady_clock::now();
    estimate_stability(factory, m_stability, rng, workers);
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count();
  };

  for (std::size_t i = 0; i < m_list.size(); ++i) {
    const std::size_t m = m_list[i];
    if (run_real) {
      ExecutionCounter counter;
      const EnsembleConfig config{m, n_target};
      const SubsetFactory factory = [&](RngStream& replica_rng) {
        return run_real_ensemble(dataset, rows, fconfig, config, replica_rng, counter);
      };
      RngStream cell_rng = root.derive(100 + i);
      out << "real," << m << ',' << m_stability << ','
          << format_double(time_cell(factory, cell_rng)) << ',' << workers << '\n';
    }
    if (run_simulated) {
      const EnsembleConfig config{m, n_target};
      const SubsetFactory factory = [&](RngStream& replica_rng) {
        return run_simulated_ensemble(params, config, replica_rng);
      };
      RngStream cell_rng = root.derive(200 + i);
      out << "simulated," << m << ',' << m_stability << ','
          << format_double(time_cell(factory, cell_rng)) << ',' << workers << '\n';
    }
  }
  write_text(out_path, out.str());
  return kExitOk;
}

int cmd_ntarget_scan(const DatasetOptions& data_options, const ForestOptions& forest_options,
                     const std::vector<std::size_t>& n_target_list,
                     const std::vector<std::size_t>& n_tree_list, std::size_t m_ensemble,
                     std::uint64_t seed, unsigned workers, const std::string& out_path) {
  RngStream root = make_stream(seed, 0);
  RngStream data_rng = root.derive(0);
  const Dataset dataset = data_options.resolve(data_rng);
  std::vector<std::size_t> rows(dataset.n_sample);
  std::iota(rows.begin(), rows.end(), std::size_t{0});

  std::ostringstream out;
  out << "n_target,n_tree,m_ensemble,accuracy,seed\n";
  std::size_t cell = 0;
  for (std::size_t n_target : n_target_list) {
    for (std::size_t n_tree : n_tree_list) {
      ForestConfig fconfig = forest_options.resolve();
      fconfig.n_tree = n_tree;
      ExecutionCounter counter;
      const EnsembleConfig config{m_ensemble, n_target};
      RngStream select_rng = root.derive(2 * cell + 1);
      const FeatureSubset selected =
          run_real_ensemble(dataset, rows, fconfig, config, select_rng, counter, workers);
      RngStream loo_rng = root.derive(2 * cell + 2);
      const double accuracy = loo_accuracy(dataset, selected, fconfig, loo_rng, workers);
      out << n_target << ',' << n_tree << ',' << m_ensemble << ',' << format_double(accuracy)
          << ',' << seed << '\n';
      ++cell;
    }
  }
  write_text(out_path, out.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stabsim: stability estimation for ensemble feature selectors"};
  app.set_version_flag("--version", stabsim::kToolVersion);
  app.require_subcommand(1);

  // simulate-stability
  auto* sim = app.add_subcommand("simulate-stability",
                                 "stability of the simulated ensemble over a (p, m_ensemble) sweep");
  SimulatorParams sim_base;
  std::vector<double> sim_p{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<std::size_t> sim_m{1, 5, 10, 20, 30, 40, 50};
  std::size_t sim_m_stability = 30;
  std::uint64_t sim_seed = 0;
  unsigned sim_workers = 1;
  std::string sim_out;
  sim->add_option("--n-feature", sim_base.n_feature, "feature count")->required();
  sim->add_option("--n-target", sim_base.n_target, "selected feature count")->required();
  sim->add_option("--n-useful", sim_base.n_useful, "useful-pool size")->required();
  sim->add_option("--p", sim_p, "p values (comma separated)")->delimiter(',');
  sim->add_option("--m-ensemble", sim_m, "ensemble sizes (comma separated)")->delimiter(',');
  sim->add_option("--m-stability", sim_m_stability, "stability replicas")->capture_default_str();
  sim->add_option("--seed", sim_seed, "master seed")->envname("STABSIM_SEED")->required();
  sim->add_option("--workers", sim_workers, "worker threads")->capture_default_str();
  sim->add_option("--out", sim_out, "output CSV path (default stdout)");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "full simulator calibration against a base selector");
  DatasetOptions cal_data;
  ForestOptions cal_forest;
  cal_data.add_flags(*cal);
  cal_forest.add_flags(*cal);
  CalibrationConfig cal_config;
  std::optional<std::size_t> cal_truth_n_useful;
  std::optional<double> cal_truth_p;
  std::size_t cal_n_feature = 0;
  std::uint64_t cal_seed = 0;
  unsigned cal_workers = 1;
  std::string cal_out_json, cal_out_csv;
  cal->add_option("--n-target", cal_config.n_target, "selected feature count")->required();
  cal->add_option("--m-ensemble", cal_config.m_ensemble, "weak selectors per estimation")
      ->capture_default_str();
  cal->add_option("--m-stability", cal_config.m_stability, "stability replicas")
      ->capture_default_str();
  cal->add_option("--grid", cal_config.p_grid, "p grid (comma separated)")->delimiter(',');
  cal->add_option("--curve-m", cal_config.curve_m_ensemble,
                  "ensemble sizes of the final stability curve")
      ->delimiter(',');
  cal->add_option("--t-reps", cal_config.t_reps, "threshold characterization repetitions")
      ->capture_default_str();
  cal->add_option("--target-m-ensemble", cal_config.stability_target_m_ensemble,
                  "ensemble size for the measured stability target")
      ->capture_default_str();
  cal->add_option("--truth-n-useful", cal_truth_n_useful,
                  "calibrate against a simulated ground truth with this n_useful");
  cal->add_option("--truth-p", cal_truth_p, "ground-truth p");
  cal->add_option("--n-feature", cal_n_feature, "feature count (ground-truth mode)");
  cal->add_option("--seed", cal_seed, "master seed")->envname("STABSIM_SEED")->required();
  cal->add_option("--workers", cal_workers, "worker threads")->capture_default_str();
  cal->add_option("--out-json", cal_out_json, "report JSON path (default stdout)");
  cal->add_option("--out-csv", cal_out_csv, "plot CSV path");

  // theorem-check
  auto* thm = app.add_subcommand("theorem-check", "first-draw probability oracle comparison");
  FirstDrawInputs thm_inputs;
  std::size_t thm_trials = 1000000;
  std::uint64_t thm_seed = 0;
  unsigned thm_workers = 1;
  thm->add_option("--n-feature", thm_inputs.n_f, "feature count")->required();
  thm->add_option("--n-target", thm_inputs.n_t, "selected feature count")->required();
  thm->add_option("--n-useful", thm_inputs.n_m, "useful-pool size")->required();
  thm->add_option("--p", thm_inputs.p, "member-draw probability")->required();
  thm->add_option("--trials", thm_trials, "Monte Carlo trials")->capture_default_str();
  thm->add_option("--seed", thm_seed, "master seed")->envname("STABSIM_SEED")->required();
  thm->add_option("--workers", thm_workers, "worker threads")->capture_default_str();

  // bench
  auto* bench = app.add_subcommand("bench", "wall-clock comparison of real vs simulated stability");
  DatasetOptions bench_data;
  ForestOptions bench_forest;
  bench_data.add_flags(*bench);
  bench_forest.add_flags(*bench);
  std::size_t bench_n_target = 20;
  std::size_t bench_n_useful = 60;
  double bench_p = 0.7;
  std::vector<std::size_t> bench_m{1, 10, 20, 30, 40, 50};
  std::size_t bench_m_stability = 5;
  std::string bench_mode = "both";
  std::uint64_t bench_seed = 0;
  unsigned bench_workers = 1;
  std::string bench_out;
  bench->add_option("--n-target", bench_n_target, "selected feature count")->capture_default_str();
  bench->add_option("--n-useful", bench_n_useful, "simulator useful-pool size")
      ->capture_default_str();
  bench->add_option("--p", bench_p, "simulator p")->capture_default_str();
  bench->add_option("--m-ensemble", bench_m, "ensemble sizes (comma separated)")->delimiter(',');
  bench->add_option("--m-stability", bench_m_stability, "stability replicas")
      ->capture_default_str();
  bench->add_option("--mode", bench_mode, "both | real | simulated")
      ->check(CLI::IsMember({"both", "real", "simulated"}))
      ->capture_default_str();
  bench->add_option("--seed", bench_seed, "master seed")->envname("STABSIM_SEED")->required();
  bench->add_option("--workers", bench_workers, "worker threads (1 mirrors a single CPU)")
      ->capture_default_str();
  bench->add_option("--out", bench_out, "output CSV path (default stdout)");

  // ntarget-scan
  auto* scan = app.add_subcommand("ntarget-scan",
                                  "leave-one-out accuracy over an (n_target, n_tree) grid");
  DatasetOptions scan_data;
  ForestOptions scan_forest;
  scan_data.add_flags(*scan);
  scan_forest.add_flags(*scan);
  std::vector<std::size_t> scan_targets{5, 10, 20};
  std::vector<std::size_t> scan_trees{50, 100};
  std::size_t scan_m_ensemble = 10;
  std::uint64_t scan_seed = 0;
  unsigned scan_workers = 1;
  std::string scan_out;
  scan->add_option("--n-target", scan_targets, "n_target grid (comma separated)")->delimiter(',');
  scan->add_option("--n-tree-grid", scan_trees, "n_tree grid (comma separated)")->delimiter(',');
  scan->add_option("--m-ensemble", scan_m_ensemble, "weak selectors per selection")
      ->capture_default_str();
  scan->add_option("--seed", scan_seed, "master seed")->envname("STABSIM_SEED")->required();
  scan->add_option("--workers", scan_workers, "worker threads")->capture_default_str();
  scan->add_option("--out", scan_out, "output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sim)
      return cmd_simulate_stability(sim_base, sim_p, sim_m, sim_m_stability, sim_seed,
                                    sim_workers, sim_out);
    if (*cal)
      return cmd_calibrate(cal_data, cal_forest, cal_config, cal_truth_n_useful, cal_truth_p,
                           cal_n_feature, cal_seed, cal_workers, cal_out_json, cal_out_csv);
    if (*thm) return cmd_theorem_check(thm_inputs, thm_trials, thm_seed, thm_workers);
    if (*bench)
      return cmd_bench(bench_data, bench_forest, bench_n_target, bench_n_useful, bench_p,
                       bench_m, bench_m_stability, bench_mode, bench_seed, bench_workers,
                       bench_out);
    if (*scan)
      return cmd_ntarget_scan(scan_data, scan_forest, scan_targets, scan_trees, scan_m_ensemble,
                              scan_seed, scan_workers, scan_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
