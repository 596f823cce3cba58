#pragma once

#include <map>
#include <string>

#include "reachkit/harness/grid_baseline.hpp"
#include "reachkit/lipschitz/lipschitz.hpp"
#include "reachkit/planner/scp.hpp"
#include "reachkit/robup/robup.hpp"

namespace reachkit::harness {

struct CoverageRow {
  std::string method;
  long budget = 0;  // evaluation budget (the CSV "M" column)
  int k = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct CoverageReport {
  std::vector<CoverageRow> rows;
  double wall_clock_ms = 0.0;  // informational; never serialized to result files
};

// ------------------------------------------------------------- linear study

struct LinearComparisonConfig {
  std::vector<int> dims{3, 4};
  std::vector<double> control_bounds{0.5, 1.0, 2.0};
  std::vector<long> eval_schedule{10, 32, 100, 316, 1000, 3162, 10000};
  int max_grid_cells_per_dim = 12;
  int repetitions = 10;
  double step_size = 1.0;
  int adv_iterations = 1;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct LinearComparisonResult {
  struct Entry {
    int dim = 0;
    double control_bound = 0.0;
    CoverageReport report;
  };
  std::vector<Entry> entries;

  /// Log-interpolated evaluation budget at which a method's mean coverage
  /// first reaches `level` for the given (dim, control_bound) entry.
  static double evals_to_reach(const CoverageReport& report, const std::string& method,
                               double level);
};

LinearComparisonResult run_linear_comparison(const LinearComparisonConfig& cfg);

// --------------------------------------------------------- NN coverage study

struct NnCoverageConfig {
  int instances = 100;
  int horizon = 5;
  int m_randup = 3000;
  int m_robup = 2000;
  int adv_iterations = 1;
  double step_size = 1.0;
  int containment_trajectories = 1000;  // per instance, against the sound tube
  std::uint64_t seed = 0;
  int threads = 0;
  std::string weights_path;
};

struct NnCoverageResult {
  CoverageReport report;  // methods: randup, robup, lipschitz_sqrt, lipschitz_literal
  long containment_checks = 0;
  long containment_violations = 0;  // sound-convention tube, must stay 0
  // Per-instance coverage per timestep (k = 0..N), for dominance statistics.
  std::vector<std::vector<double>> randup_coverage;
  std::vector<std::vector<double>> robup_coverage;
};

NnCoverageResult run_nn_coverage(const NnCoverageConfig& cfg);

// ------------------------------------------------------------ spacecraft sweep

struct SpacecraftSweepConfig {
  int repetitions = 50;
  std::vector<int> particle_counts{50, 100, 200};
  std::vector<int> adv_iterations{0, 1, 2, 3, 4, 5};
  int horizon = 20;
  double step_size = 1.0;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct SweepRow {
  int particles = 0;
  int adv_iterations = 0;
  double mean_relative_volume = 0.0;  // positional volume vs the largest configuration
  double wall_clock_ms = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

SweepResult run_spacecraft_sweep(const SpacecraftSweepConfig& cfg);

// ---------------------------------------------------------------- sensitivity

struct SensitivityRow {
  int k = 0;
  int particle_index = -1;
  double signed_distance = 0.0;
  Eigen::VectorXd theta;
  Eigen::VectorXd disturbance;  // the draw applied into step k
};

/// Per-timestep extremal particle under a signed-distance functor (positive
/// means margin); provenance comes from the retained tuples.
std::vector<SensitivityRow> sensitivity_report(
    const std::vector<dynamics::Trajectory>& trajectories,
    const std::vector<dynamics::ParamTuple>& tuples,
    const std::function<double(const Eigen::VectorXd&)>& signed_distance);

/// Distance functor over a set of obstacles acting on the leading position
/// components.
std::function<double(const Eigen::VectorXd&)> obstacle_distance(
    const std::vector<planner::Obstacle>& obstacles, int position_dim);

// ------------------------------------------------------- experiment plumbing

/// The standard spacecraft uncertainty blocks (mass/inertia bounds and the
/// per-component disturbance bounds) shared by the sweep and planning studies.
geometry::AxisAlignedBox spacecraft_theta_box();
geometry::AxisAlignedBox spacecraft_disturbance_box();

}  // namespace reachkit::harness
