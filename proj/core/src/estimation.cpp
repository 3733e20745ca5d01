#include "stabsim/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "stabsim/ensemble.hpp"
#include "stabsim/parallel.hpp"
#include "stabsim/stability.hpp"
#include "stabsim/version.hpp"

namespace stabsim {

std::uint64_t uniform_threshold(std::size_t n_feature, std::size_t n_target,
                                std::size_t m_ensemble, RngStream& rng) {
  if (m_ensemble == 0) throw std::invalid_argument("uniform_threshold: m_ensemble must be >= 1");
  if (n_target > n_feature)
    throw std::invalid_argument("uniform_threshold: n_target exceeds n_feature");
  std::vector<std::uint64_t> counts(n_feature, 0);
  for (std::size_t m = 0; m < m_ensemble; ++m) {
    RngStream run_rng = rng.derive(m);
    const FeatureRanking ranking = uniform_rank(n_feature, run_rng);
    for (std::size_t pos = 0; pos < n_target; ++pos) ++counts[ranking.order[pos]];
  }
  return *std::max_element(counts.begin(), counts.end());
}

TUniformStats uniform_threshold_stats(std::size_t n_feature, std::size_t n_target,
                                      std::size_t m_ensemble, std::size_t reps,
                                      RngStream& rng, unsigned workers) {
  if (reps == 0) throw std::invalid_argument("uniform_threshold_stats: reps must be >= 1");
  std::vector<std::uint64_t> values(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    RngStream rep_rng = rng.derive(r);
    values[r] = uniform_threshold(n_feature, n_target, m_ensemble, rep_rng);
  });
  double mean = 0.0;
  for (std::uint64_t v : values) mean += static_cast<double>(v);
  mean /= static_cast<double>(reps);
  double var = 0.0;
  for (std::uint64_t v : values) {
    const double d = static_cast<double>(v) - mean;
    var += d * d;
  }
  var /= static_cast<double>(reps);
  return {values.front(), mean, std::sqrt(var), reps};
}

std::vector<std::uint64_t> collect_counts(BaseSelector& selector, std::size_t m_ensemble,
                                          std::size_t n_target, RngStream& rng,
                                          unsigned workers) {
  if (m_ensemble == 0) throw std::invalid_argument("collect_counts: m_ensemble must be >= 1");
  const std::size_t n_feature = selector.n_feature();
  std::vector<std::vector<FeatureIndex>> tops(m_ensemble);
  parallel_for(m_ensemble, workers, [&](std::size_t m) {
    RngStream run_rng = rng.derive(m);
    const FeatureRanking ranking = selector.rank(run_rng);
    tops[m].assign(ranking.order.begin(),
                   ranking.order.begin() + static_cast<std::ptrdiff_t>(n_target));
  });
  std::vector<std::uint64_t> counts(n_feature, 0);
  for (const auto& top : tops)
    for (FeatureIndex f : top) ++counts[f];
  return counts;
}

std::size_t estimate_n_useful(std::span<const std::uint64_t> counts, std::uint64_t t_uniform) {
  std::size_t n = 0;
  for (std::uint64_t c : counts)
    if (c > t_uniform) ++n;
  return n;
}

namespace {

// Counts base-selector invocations so the execution-count contract can be
// checked independently of whether the base is real or a simulated stand-in.
class CountingSelector final : public BaseSelector {
 public:
  explicit CountingSelector(BaseSelector& inner) : inner_(inner) {}
  FeatureRanking rank(RngStream& rng) override {
    invocations_.fetch_add(1, std::memory_order_relaxed);
    return inner_.rank(rng);
  }
  std::size_t n_feature() const override { return inner_.n_feature(); }
  std::string describe() const override { return inner_.describe(); }
  std::uint64_t invocations() const { return invocations_.load(std::memory_order_relaxed); }

 private:
  BaseSelector& inner_;
  std::atomic<std::uint64_t> invocations_{0};
};

double simulated_stability(const SimulatorParams& params, std::size_t m_ensemble_sim,
                           std::size_t m_stability, RngStream& rng, ExecutionCounter* counter,
                           unsigned workers) {
  const EnsembleConfig config{m_ensemble_sim, params.n_target};
  const SubsetFactory factory = [&](RngStream& replica_rng) {
    return run_simulated_ensemble(params, config, replica_rng, counter);
  };
  return estimate_stability(factory, m_stability, rng, workers).j;
}

}  // namespace

PEstimate estimate_p(double stability_target, const SimulatorParams& base,
                     std::span<const double> grid, std::size_t m_ensemble_sim,
                     std::size_t m_stability, RngStream& rng, ExecutionCounter* counter,
                     unsigned workers) {
  if (grid.empty()) throw std::invalid_argument("estimate_p: empty grid");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("estimate_p: grid must be sorted ascending");

  PEstimate result;
  result.grid.resize(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t i) {
    SimulatorParams params = base;
    params.p = grid[i];
    RngStream point_rng = rng.derive(i);
    result.grid[i] = {grid[i],
                      simulated_stability(params, m_ensemble_sim, m_stability, point_rng,
                                          counter, 1)};
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.grid.size(); ++i) {
    // Ties go to the smaller p; the grid is ascending, so strict improvement only.
    if (std::abs(result.grid[i].j - stability_target) <
        std::abs(result.grid[best].j - stability_target))
      best = i;
  }
  result.p_hat = result.grid[best].p;
  return result;
}

BisectionResult estimate_p_binary_search(double stability_target, const SimulatorParams& base,
                                         double tolerance, std::size_t max_iter,
                                         std::size_t m_ensemble_sim, std::size_t m_stability,
                                         RngStream& rng, ExecutionCounter* counter,
                                         unsigned workers) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("estimate_p_binary_search: tolerance must be > 0");
  if (max_iter == 0) throw std::invalid_argument("estimate_p_binary_search: max_iter must be >= 1");

  BisectionResult result;
  auto evaluate = [&](double p) {
    SimulatorParams params = base;
    params.p = p;
    RngStream eval_rng = rng.derive(result.evaluations);
    ++result.evaluations;
    return simulated_stability(params, m_ensemble_sim, m_stability, eval_rng, counter, workers);
  };

  const double j_low = evaluate(0.0);
  if (stability_target <= j_low) {
    result.p_hat = 0.0;
    result.j_at_p_hat = j_low;
    result.converged = std::abs(j_low - stability_target) <= tolerance;
    return result;
  }
  const double j_high = evaluate(1.0);
  if (stability_target >= j_high) {
    result.p_hat = 1.0;
    result.j_at_p_hat = j_high;
    result.converged = std::abs(j_high - stability_target) <= tolerance;
    return result;
  }

  double lo = 0.0, hi = 1.0;
  result.p_hat = 0.0;
  result.j_at_p_hat = j_low;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const double mid = (lo + hi) / 2.0;
    const double j_mid = evaluate(mid);
    if (std::abs(j_mid - stability_target) < std::abs(result.j_at_p_hat - stability_target)) {
      result.p_hat = mid;
      result.j_at_p_hat = j_mid;
    }
    if (std::abs(j_mid - stability_target) <= tolerance) {
      result.converged = true;
      return result;
    }
    if (j_mid < stability_target) lo = mid;
    else hi = mid;
  }
  return result;
}

std::size_t verify_n_useful(std::size_t n_useful, double p, std::size_t n_feature,
                            std::size_t n_target, std::size_t m_ensemble, RngStream& rng,
                            ExecutionCounter* counter, unsigned workers) {
  SimulatorParams params{n_feature, n_target, n_useful, p};
  params.validate();
  RngStream threshold_rng = rng.derive(0);
  const std::uint64_t t = uniform_threshold(n_feature, n_target, m_ensemble, threshold_rng);
  SimulatedSelector selector(params, counter);
  RngStream counts_rng = rng.derive(1);
  const auto counts = collect_counts(selector, m_ensemble, n_target, counts_rng, workers);
  return estimate_n_useful(counts, t);
}

FixedPointResult fixed_point_iterate(std::size_t start_n_useful, double p,
                                     std::size_t max_iter, std::size_t slack,
                                     std::size_t n_feature, std::size_t n_target,
                                     std::size_t m_ensemble, RngStream& rng,
                                     ExecutionCounter* counter, unsigned workers) {
  if (max_iter == 0) throw std::invalid_argument("fixed_point_iterate: max_iter must be >= 1");
  FixedPointResult result;
  std::size_t current = start_n_useful;
  for (std::size_t it = 0; it < max_iter; ++it) {
    RngStream iter_rng = rng.derive(it);
    const std::size_t sim_n_useful = std::max(current, n_target);
    const std::size_t next =
        verify_n_useful(sim_n_useful, p, n_feature, n_target, m_ensemble, iter_rng,
                        counter, workers);
    result.trajectory.push_back(next);
    const std::size_t delta = next > current ? next - current : current - next;
    current = next;
    if (delta <= slack) break;
  }
  result.n_useful_star = current;
  return result;
}

void CalibrationConfig::validate() const {
  if (n_target == 0) throw std::invalid_argument("CalibrationConfig: n_target must be >= 1");
  if (m_ensemble == 0) throw std::invalid_argument("CalibrationConfig: m_ensemble must be >= 1");
  if (m_stability < 2) throw std::invalid_argument("CalibrationConfig: m_stability must be >= 2");
  if (p_grid.empty()) throw std::invalid_argument("CalibrationConfig: empty p grid");
  if (!std::is_sorted(p_grid.begin(), p_grid.end()))
    throw std::invalid_argument("CalibrationConfig: p grid must be sorted ascending");
  for (double p : p_grid)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("CalibrationConfig: grid p outside [0, 1]");
  if (t_reps == 0) throw std::invalid_argument("CalibrationConfig: t_reps must be >= 1");
  if (stability_target_m_ensemble == 0)
    throw std::invalid_argument("CalibrationConfig: stability_target_m_ensemble must be >= 1");
}

CalibrationReport full_calibration(BaseSelector& base, const CalibrationConfig& config,
                                   RngStream& rng, ExecutionCounter& counter,
                                   unsigned workers) {
  config.validate();
  const std::size_t n_feature = base.n_feature();
  if (config.n_target > n_feature)
    throw std::invalid_argument("full_calibration: n_target exceeds n_feature");
  const auto before = counter.snapshot();
  CountingSelector counted_base(base);

  CalibrationReport report;
  report.schema = kReportSchema;
  report.tool_version = kToolVersion;
  report.rng_family = kRngFamily;
  report.master_seed = rng.master_seed();
  report.selector = base.describe();
  report.n_feature = n_feature;
  report.n_target = config.n_target;
  report.m_ensemble = config.m_ensemble;
  report.m_stability = config.m_stability;
  report.stability_target_m_ensemble = config.stability_target_m_ensemble;
  report.p_grid = config.p_grid;
  report.curve_m_ensemble = config.curve_m_ensemble;

  // 1. threshold from uniform selectors (no real runs)
  RngStream t_rng = rng.derive(1);
  const TUniformStats t_stats = uniform_threshold_stats(
      n_feature, config.n_target, config.m_ensemble, config.t_reps, t_rng, workers);
  report.t_uniform = t_stats.value;
  report.t_uniform_mean = t_stats.mean;
  report.t_uniform_std = t_stats.stddev;
  report.t_uniform_reps = t_stats.reps;

  // 2. counts from the base selector: m_ensemble real runs
  RngStream counts_rng = rng.derive(2);
  const auto counts =
      collect_counts(counted_base, config.m_ensemble, config.n_target, counts_rng, workers);
  report.n_useful_hat = estimate_n_useful(counts, report.t_uniform);
  report.n_useful_sim = std::max(report.n_useful_hat, config.n_target);

  // 3. stability target: stability_target_m_ensemble * m_stability real runs
  RngStream target_rng = rng.derive(3);
  const EnsembleConfig target_config{config.stability_target_m_ensemble, config.n_target};
  const SubsetFactory target_factory = [&](RngStream& replica_rng) {
    return run_selector_ensemble(counted_base, target_config, replica_rng);
  };
  report.stability_target =
      estimate_stability(target_factory, config.m_stability, target_rng, workers).j;

  // 4. p grid (simulated only)
  SimulatorParams sim_base{n_feature, config.n_target, report.n_useful_sim, 0.0};
  RngStream grid_rng = rng.derive(4);
  ExecutionCounter sim_counter;
  const PEstimate p_estimate =
      estimate_p(report.stability_target, sim_base, config.p_grid,
                 config.stability_target_m_ensemble, config.m_stability, grid_rng,
                 &sim_counter, workers);
  report.p_hat = p_estimate.p_hat;
  report.grid = p_estimate.grid;

  // 5. verification (simulated only)
  RngStream verify_rng = rng.derive(5);
  report.n_useful_v = verify_n_useful(report.n_useful_sim, report.p_hat, n_feature,
                                      config.n_target, config.m_ensemble, verify_rng,
                                      &sim_counter, workers);

  // 6. ensemble stability curve at p_hat (simulated only)
  SimulatorParams curve_params = sim_base;
  curve_params.p = report.p_hat;
  RngStream curve_rng = rng.derive(6);
  report.curve.resize(config.curve_m_ensemble.size());
  parallel_for(config.curve_m_ensemble.size(), workers, [&](std::size_t i) {
    RngStream point_rng = curve_rng.derive(i);
    const EnsembleConfig ensemble_config{config.curve_m_ensemble[i], config.n_target};
    const SubsetFactory factory = [&](RngStream& replica_rng) {
      return run_simulated_ensemble(curve_params, ensemble_config, replica_rng, &sim_counter);
    };
    report.curve[i] = {report.p_hat, config.curve_m_ensemble[i],
                       estimate_stability(factory, config.m_stability, point_rng).j};
  });

  const auto after = counter.snapshot();
  report.real_runs = after.real_runs - before.real_runs;
  report.simulated_runs = sim_counter.snapshot().simulated_runs;
  counter.add_simulated(report.simulated_runs);

  // The pipeline touches the base selector in steps 2 and 3 only.
  const std::uint64_t expected_base_runs =
      config.m_ensemble + config.stability_target_m_ensemble * config.m_stability;
  if (counted_base.invocations() != expected_base_runs)
    throw std::logic_error("full_calibration: base-selector run accounting violated");
  return report;
}

std::string report_to_json(const CalibrationReport& report) {
  nlohmann::json grid = nlohmann::json::array();
  for (const GridPoint& g : report.grid)
    grid.push_back({{"p", g.p}, {"m_ensemble", report.stability_target_m_ensemble}, {"j", g.j}});
  nlohmann::json curve = nlohmann::json::array();
  for (const CurvePoint& c : report.curve)
    curve.push_back({{"p", c.p}, {"m_ensemble", c.m_ensemble}, {"j", c.j}});

  const nlohmann::json j{
      {"schema", report.schema},
      {"tool_version", report.tool_version},
      {"rng", {{"family", report.rng_family}, {"master_seed", report.master_seed}}},
      {"selector", report.selector},
      {"config",
       {{"n_feature", report.n_feature},
        {"n_target", report.n_target},
        {"m_ensemble", report.m_ensemble},
        {"m_stability", report.m_stability},
        {"stability_target_m_ensemble", report.stability_target_m_ensemble},
        {"p_grid", report.p_grid},
        {"curve_m_ensemble", report.curve_m_ensemble},
        {"t_reps", report.t_uniform_reps}}},
      {"t_uniform",
       {{"value", report.t_uniform},
        {"mean", report.t_uniform_mean},
        {"std", report.t_uniform_std},
        {"reps", report.t_uniform_reps}}},
      {"n_useful_hat", report.n_useful_hat},
      {"n_useful_sim", report.n_useful_sim},
      {"stability_target", report.stability_target},
      {"p_hat", report.p_hat},
      {"n_useful_v", report.n_useful_v},
      {"grid", grid},
      {"curve", curve},
      {"execution_counts",
       {{"real_runs", report.real_runs}, {"simulated_runs", report.simulated_runs}}},
  };
  return j.dump(2) + "\n";
}

std::string report_grid_csv(const CalibrationReport& report) {
  std::ostringstream out;
  char buf[64];
  out << "p,m_ensemble,m_stability,J\n";
  auto row = [&](double p, std::size_t m, double j) {
    std::snprintf(buf, sizeof buf, "%.10g", p);
    out << buf << ',' << m << ',' << report.m_stability << ',';
    std::snprintf(buf, sizeof buf, "%.10g", j);
    out << buf << '\n';
  };
  for (const GridPoint& g : report.grid) row(g.p, report.stability_target_m_ensemble, g.j);
  for (const CurvePoint& c : report.curve) row(c.p, c.m_ensemble, c.j);
  return out.str();
}

std::vector<NaiveSweepPoint> naive_real_stability_sweep(
    BaseSelector& base, std::span<const std::size_t> m_list, std::size_t n_target,
    std::size_t m_stability, RngStream& rng, unsigned workers) {
  std::vector<NaiveSweepPoint> points(m_list.size());
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    RngStream point_rng = rng.derive(i);
    const EnsembleConfig config{m_list[i], n_target};
    const SubsetFactory factory = [&](RngStream& replica_rng) {
      return run_selector_ensemble(base, config, replica_rng);
    };
    points[i] = {m_list[i], estimate_stability(factory, m_stability, point_rng, workers).j};
  }
  return points;
}

}  // namespace stabsim
