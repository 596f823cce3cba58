#pragma once

#include "reachkit/randup/randup.hpp"

namespace reachkit::robup {

struct AdversarialConfig {
  double step_size = 1.0;         // eta
  int iterations = 1;             // n_adv >= 1
  double cov_regularizer = 1e-8;  // epsilon on the sample covariance
};

/// Per-timestep center and Mahalanobis weight of the spread metric,
/// L(z) = (1/N) sum_k |x_k(z) - c_k|^2_{Q_k}, with Q_k the regularized
/// inverse sample covariance of the particle set the state was built from.
struct SpreadMetricState {
  std::vector<Eigen::VectorXd> centers;  // k = 1..N
  std::vector<Eigen::MatrixXd> weights;  // k = 1..N, symmetric positive definite

  int horizon() const { return static_cast<int>(centers.size()); }
};

/// State from the accumulated per-timestep particle clouds (k = 0 entry of
/// the estimate is ignored; the metric runs over k = 1..N). Requires at
/// least two particles.
SpreadMetricState build_spread_state(const randup::ReachEstimate& estimate,
                                     double cov_regularizer);

double spread_metric(const SpreadMetricState& state, const dynamics::Trajectory& traj);

/// Gradient of the spread metric w.r.t. every component of z, assembled via
/// the rollout adjoint with cotangents (2/N) Q_k (x_k - c_k).
dynamics::ParamGradient spread_metric_gradient(const dynamics::DynamicsModel& model,
                                               const SpreadMetricState& state,
                                               const dynamics::ParamTuple& z);

struct SweepDiagnostics {
  double mean_metric = 0.0;      // spread metric averaged over live tuples
  double clamped_fraction = 0.0; // coordinates moved by the projection
};

struct RobupResult {
  randup::ReachEstimate estimate;            // hulls over all accumulated particles
  std::vector<dynamics::ParamTuple> tuples;  // all M*(n_adv+1) tuples, sweep-major
  std::vector<dynamics::Trajectory> trajectories;
  std::vector<SweepDiagnostics> diagnostics;  // one entry per sweep
};

/// Adversarial refinement: seeds with a plain sampling run, then n_adv sweeps
/// of projected gradient ascent on the spread metric over the M live tuples,
/// accumulating the union of particle sets. A tuple whose ascended value
/// fails to propagate reverts to its pre-step value for that sweep.
RobupResult rob_up(const dynamics::DynamicsModel& model, const randup::UncertaintySpec& spec,
                   const randup::SamplerConfig& cfg, const AdversarialConfig& adv,
                   const randup::EstimateOptions& opts = {});

/// Block-wise Euclidean projection of z onto the product set Z.
dynamics::ParamTuple project_tuple(const dynamics::ParamTuple& z,
                                   const randup::UncertaintySpec& spec);

}  // namespace reachkit::robup
