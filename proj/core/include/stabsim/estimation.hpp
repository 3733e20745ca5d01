#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stabsim/rng.hpp"
#include "stabsim/selectors.hpp"
#include "stabsim/types.hpp"

namespace stabsim {

/// Threshold t_uniform: run the uniform selector m_ensemble times, count how
/// often each feature lands in the top n_target, return the maximum count.
std::uint64_t uniform_threshold(std::size_t n_feature, std::size_t n_target,
                                std::size_t m_ensemble, RngStream& rng);

/// Distribution of the threshold over `reps` repetitions. value is the first
/// repetition (the one a single calibration would use).
struct TUniformStats {
  std::uint64_t value = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t reps = 1;
};
TUniformStats uniform_threshold_stats(std::size_t n_feature, std::size_t n_target,
                                      std::size_t m_ensemble, std::size_t reps,
                                      RngStream& rng, unsigned workers = 1);

/// c_i = number of the m_ensemble runs whose top-n_target prefix contains
/// feature i. Conservation: sum c_i == m_ensemble * n_target.
std::vector<std::uint64_t> collect_counts(BaseSelector& selector, std::size_t m_ensemble,
                                          std::size_t n_target, RngStream& rng,
                                          unsigned workers = 1);

/// Number of features selected strictly more often than the threshold.
std::size_t estimate_n_useful(std::span<const std::uint64_t> counts, std::uint64_t t_uniform);

struct GridPoint {
  double p = 0.0;
  double j = 0.0;
};

struct PEstimate {
  double p_hat = 0.0;
  std::vector<GridPoint> grid;
};

/// Simulated stability per grid p (at ensemble size m_ensemble_sim, default 1
/// matching a single base selector); p_hat minimizes |J_sim(p) - target|,
/// ties to the smaller p.
PEstimate estimate_p(double stability_target, const SimulatorParams& base,
                     std::span<const double> grid, std::size_t m_ensemble_sim,
                     std::size_t m_stability, RngStream& rng,
                     ExecutionCounter* counter = nullptr, unsigned workers = 1);

/// Bisection on p in [0, 1] using the monotone p -> J map; stops when
/// |J_sim - target| <= tolerance or max_iter midpoints were evaluated.
/// Boundary targets return 0 or 1 with converged = false.
struct BisectionResult {
  double p_hat = 0.0;
  double j_at_p_hat = 0.0;
  bool converged = false;
  std::size_t evaluations = 0;
};
BisectionResult estimate_p_binary_search(double stability_target, const SimulatorParams& base,
                                         double tolerance, std::size_t max_iter,
                                         std::size_t m_ensemble_sim, std::size_t m_stability,
                                         RngStream& rng, ExecutionCounter* counter = nullptr,
                                         unsigned workers = 1);

/// Re-runs the n_useful estimation with the simulated selector f_{n_useful,p}
/// in place of the real one (fresh threshold, fresh counts).
std::size_t verify_n_useful(std::size_t n_useful, double p, std::size_t n_feature,
                            std::size_t n_target, std::size_t m_ensemble, RngStream& rng,
                            ExecutionCounter* counter = nullptr, unsigned workers = 1);

/// Iterates n <- A[f_{n,p}] until the step change is within `slack` or
/// max_iter re-estimations were done. trajectory holds the successive
/// re-estimates (the start value is not included); with max_iter = 1 this is
/// exactly verify_n_useful.
struct FixedPointResult {
  std::size_t n_useful_star = 0;
  std::vector<std::size_t> trajectory;
};
FixedPointResult fixed_point_iterate(std::size_t start_n_useful, double p,
                                     std::size_t max_iter, std::size_t slack,
                                     std::size_t n_feature, std::size_t n_target,
                                     std::size_t m_ensemble, RngStream& rng,
                                     ExecutionCounter* counter = nullptr, unsigned workers = 1);

struct CalibrationConfig {
  std::size_t n_target = 0;
  std::size_t m_ensemble = 50;
  std::size_t m_stability = 30;
  std::vector<double> p_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<std::size_t> curve_m_ensemble = {1, 5, 10, 20, 30, 40, 50};
  std::size_t t_reps = 1;
  /// Ensemble size at which the real stability target is measured (1 = the
  /// single base selector).
  std::size_t stability_target_m_ensemble = 1;

  void validate() const;
};

struct CurvePoint {
  double p = 0.0;
  std::size_t m_ensemble = 0;
  double j = 0.0;
};

struct CalibrationReport {
  std::string schema;
  std::string tool_version;
  std::string rng_family;
  std::uint64_t master_seed = 0;
  std::string selector;

  std::size_t n_feature = 0;
  std::size_t n_target = 0;
  std::size_t m_ensemble = 0;
  std::size_t m_stability = 0;
  std::size_t stability_target_m_ensemble = 1;
  std::vector<double> p_grid;
  std::vector<std::size_t> curve_m_ensemble;

  std::uint64_t t_uniform = 0;
  double t_uniform_mean = 0.0;
  double t_uniform_std = 0.0;
  std::size_t t_uniform_reps = 1;

  std::size_t n_useful_hat = 0;  // raw count of features above the threshold
  std::size_t n_useful_sim = 0;  // max(n_useful_hat, n_target), used for simulation
  double stability_target = 0.0;
  double p_hat = 0.0;
  std::size_t n_useful_v = 0;

  std::vector<GridPoint> grid;
  std::vector<CurvePoint> curve;

  std::uint64_t real_runs = 0;
  std::uint64_t simulated_runs = 0;
};

/// Full pipeline: threshold -> counts -> n_useful_hat -> stability target ->
/// p grid -> verification -> ensemble stability curve at p_hat. Consumes
/// exactly m_ensemble + stability_target_m_ensemble * m_stability real runs
/// and throws std::logic_error if the instrumented count disagrees.
CalibrationReport full_calibration(BaseSelector& base, const CalibrationConfig& config,
                                   RngStream& rng, ExecutionCounter& counter,
                                   unsigned workers = 1);

std::string report_to_json(const CalibrationReport& report);
std::string report_grid_csv(const CalibrationReport& report);

/// Naive baseline: real-ensemble stability at each ensemble size, costing
/// m_stability * sum(m_list) real runs.
struct NaiveSweepPoint {
  std::size_t m_ensemble = 0;
  double j = 0.0;
};
std::vector<NaiveSweepPoint> naive_real_stability_sweep(
    BaseSelector& base, std::span<const std::size_t> m_list, std::size_t n_target,
    std::size_t m_stability, RngStream& rng, unsigned workers = 1);

}  // namespace stabsim
