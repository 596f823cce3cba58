#include "reachkit/robup/robup.hpp"

#include <stdexcept>

#include "reachkit/harness/thread_pool.hpp"

namespace reachkit::robup {

SpreadMetricState build_spread_state(const randup::ReachEstimate& estimate,
                                     double cov_regularizer) {
  const int horizon = estimate.horizon();
  if (horizon < 1) throw std::invalid_argument("spread state: empty horizon");
  SpreadMetricState state;
  state.centers.reserve(horizon);
  state.weights.reserve(horizon);
  for (int k = 1; k <= horizon; ++k) {
    const Eigen::MatrixXd& cloud = estimate.steps[k].particles;
    const int m = static_cast<int>(cloud.rows());
    const int n = static_cast<int>(cloud.cols());
    if (m < 2) throw std::invalid_argument("spread state: need at least two particles");
    const Eigen::VectorXd center = cloud.colwise().mean().transpose();
    const Eigen::MatrixXd centered = cloud.rowwise() - center.transpose();
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(m - 1);
    // Degenerate directions (deterministic state dimensions) need a floor
    // before inversion.
    const double floor = cov_regularizer * (cov.trace() / n + 1e-30);
    cov += floor * Eigen::MatrixXd::Identity(n, n);
    state.centers.push_back(center);
    state.weights.push_back(cov.llt().solve(Eigen::MatrixXd::Identity(n, n)));
  }
  return state;
}

double spread_metric(const SpreadMetricState& state, const dynamics::Trajectory& traj) {
  const int horizon = state.horizon();
  if (traj.horizon() != horizon) throw std::invalid_argument("spread_metric: horizon mismatch");
  double total = 0.0;
  for (int k = 1; k <= horizon; ++k) {
    const Eigen::VectorXd d = traj.states[k] - state.centers[k - 1];
    if (d.size() != state.weights[k - 1].rows()) {
      throw std::invalid_argument("spread_metric: dimension mismatch");
    }
    total += d.dot(state.weights[k - 1] * d);
  }
  return total / static_cast<double>(horizon);
}

dynamics::ParamGradient spread_metric_gradient(const dynamics::DynamicsModel& model,
                                               const SpreadMetricState& state,
                                               const dynamics::ParamTuple& z) {
  const int horizon = state.horizon();
  const dynamics::Trajectory traj = dynamics::rollout(model, z, horizon);
  std::vector<Eigen::VectorXd> seeds;
  seeds.reserve(horizon);
  for (int k = 1; k <= horizon; ++k) {
    seeds.push_back((2.0 / horizon) * (state.weights[k - 1] *
                                       (traj.states[k] - state.centers[k - 1])));
  }
  return dynamics::rollout_gradient(model, z, horizon, seeds);
}

dynamics::ParamTuple project_tuple(const dynamics::ParamTuple& z,
                                   const randup::UncertaintySpec& spec) {
  dynamics::ParamTuple out = z;
  if (std::holds_alternative<geometry::AxisAlignedBox>(spec.x0_set)) {
    out.x0 = geometry::project_box(z.x0, std::get<geometry::AxisAlignedBox>(spec.x0_set));
  } else {
    out.x0 = geometry::project_ellipsoid(z.x0, std::get<geometry::Ellipsoid>(spec.x0_set));
  }
  for (size_t k = 0; k < out.controls.size(); ++k) {
    out.controls[k] = geometry::project_box(z.controls[k], spec.control_sets[k]);
  }
  if (spec.theta_set) out.theta = geometry::project_box(z.theta, *spec.theta_set);
  if (spec.disturbance_set) {
    for (auto& w : out.disturbances) w = geometry::project_box(w, *spec.disturbance_set);
  }
  return out;
}

namespace {

int tuple_size(const dynamics::ParamTuple& z) {
  int n = static_cast<int>(z.x0.size() + z.theta.size());
  for (const auto& u : z.controls) n += static_cast<int>(u.size());
  for (const auto& w : z.disturbances) n += static_cast<int>(w.size());
  return n;
}

int count_moved(const dynamics::ParamTuple& a, const dynamics::ParamTuple& b) {
  auto moved_in = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return static_cast<int>(((x - y).cwiseAbs().array() > 1e-14).count());
  };
  int moved = moved_in(a.x0, b.x0) + moved_in(a.theta, b.theta);
  for (size_t k = 0; k < a.controls.size(); ++k) {
    moved += moved_in(a.controls[k], b.controls[k]);
  }
  for (size_t k = 0; k < a.disturbances.size(); ++k) {
    moved += moved_in(a.disturbances[k], b.disturbances[k]);
  }
  return moved;
}

}  // namespace

RobupResult rob_up(const dynamics::DynamicsModel& model, const randup::UncertaintySpec& spec,
                   const randup::SamplerConfig& cfg, const AdversarialConfig& adv,
                   const randup::EstimateOptions& opts) {
  if (cfg.particles < 2) throw std::invalid_argument("rob_up: M must be >= 2");
  if (adv.iterations < 1) throw std::invalid_argument("rob_up: n_adv must be >= 1");
  if (!(adv.step_size >= 0.0)) throw std::invalid_argument("rob_up: step size must be >= 0");

  const int threads = harness::resolve_threads(opts.threads);
  randup::EstimateOptions inner = opts;
  inner.keep_particles = true;  // the metric state needs the clouds

  RobupResult result;
  {
    randup::RandupResult seeded = rand_up(model, spec, cfg, inner);
    result.tuples = std::move(seeded.tuples);
    result.trajectories = std::move(seeded.trajectories);
  }
  const int m = cfg.particles;

  // Live tuples are the M most recent; accumulated older particles stay
  // frozen in the union.
  std::vector<dynamics::ParamTuple> live(result.tuples.begin(), result.tuples.end());
  std::vector<dynamics::Trajectory> live_traj(result.trajectories.begin(),
                                              result.trajectories.end());

  for (int sweep = 0; sweep < adv.iterations; ++sweep) {
    const randup::ReachEstimate accumulated =
        randup::estimate_from_trajectories(result.trajectories, inner);
    const SpreadMetricState state = build_spread_state(accumulated, adv.cov_regularizer);

    SweepDiagnostics diag;
    std::vector<double> metrics(m, 0.0);
    std::vector<int> moved(m, 0);
    std::vector<int> sizes(m, 0);
    harness::parallel_for(m, threads, [&](int j) {
      dynamics::ParamGradient grad = spread_metric_gradient(model, state, live[j]);
      dynamics::ParamTuple stepped = live[j];
      stepped.x0 += adv.step_size * grad.x0;
      stepped.theta += adv.step_size * grad.theta;
      for (size_t k = 0; k < stepped.controls.size(); ++k) {
        stepped.controls[k] += adv.step_size * grad.controls[k];
      }
      for (size_t k = 0; k < stepped.disturbances.size(); ++k) {
        stepped.disturbances[k] += adv.step_size * grad.disturbances[k];
      }
      dynamics::ParamTuple projected = project_tuple(stepped, spec);
      moved[j] = count_moved(stepped, projected);
      sizes[j] = tuple_size(projected);
      try {
        dynamics::Trajectory traj = dynamics::rollout(model, projected, spec.horizon);
        live[j] = std::move(projected);
        live_traj[j] = std::move(traj);
      } catch (const std::exception&) {
        // Revert to the pre-step tuple for this sweep; keeps the particle
        // count intact.
      }
      metrics[j] = spread_metric(state, live_traj[j]);
    });

    for (int j = 0; j < m; ++j) {
      result.tuples.push_back(live[j]);
      result.trajectories.push_back(live_traj[j]);
      diag.mean_metric += metrics[j];
      diag.clamped_fraction += moved[j];
    }
    diag.mean_metric /= m;
    double total_coords = 0.0;
    for (int j = 0; j < m; ++j) total_coords += sizes[j];
    diag.clamped_fraction = total_coords > 0 ? diag.clamped_fraction / total_coords : 0.0;
    result.diagnostics.push_back(diag);
  }

  result.estimate = randup::estimate_from_trajectories(result.trajectories, opts);
  return result;
}

}  // namespace reachkit::robup
