#include "reachkit/randup/randup.hpp"

#include <cmath>
#include <stdexcept>

#include "reachkit/harness/thread_pool.hpp"
#include "reachkit/rng.hpp"

namespace reachkit::randup {

ReachEstimate estimate_from_trajectories(const std::vector<dynamics::Trajectory>& trajectories,
                                         const EstimateOptions& opts) {
  if (trajectories.empty()) throw std::invalid_argument("estimate: no trajectories");
  const int horizon = trajectories.front().horizon();
  const int n = static_cast<int>(trajectories.front().states.front().size());
  const int m = static_cast<int>(trajectories.size());
  for (const auto& t : trajectories) {
    if (t.horizon() != horizon) throw std::invalid_argument("estimate: ragged trajectories");
  }

  ReachEstimate est;
  est.steps.resize(horizon + 1);
  for (int k = 0; k <= horizon; ++k) {
    TimestepEstimate& step = est.steps[k];
    Eigen::MatrixXd cloud(m, n);
    for (int j = 0; j < m; ++j) cloud.row(j) = trajectories[j].states[k].transpose();
    step.center = cloud.colwise().mean().transpose();
    step.outer_box = geometry::outer_box(cloud, step.center);
    step.outer_ellipsoid = geometry::box_to_ellipsoid(step.outer_box, n);
    if (n <= opts.hull_max_dim) {
      step.hull = geometry::convex_hull(cloud);
    }
    if (opts.keep_particles) step.particles = std::move(cloud);
  }
  return est;
}

RandupResult rand_up(const dynamics::DynamicsModel& model, const UncertaintySpec& spec,
                     const SamplerConfig& cfg, const EstimateOptions& opts) {
  RandupResult result;
  result.tuples = sample_params(spec, cfg);
  result.trajectories.resize(result.tuples.size());
  const int threads = harness::resolve_threads(opts.threads);
  harness::parallel_for(static_cast<int>(result.tuples.size()), threads, [&](int j) {
    try {
      result.trajectories[j] = dynamics::rollout(model, result.tuples[j], spec.horizon);
    } catch (const std::exception& e) {
      throw std::runtime_error("rand_up: particle " + std::to_string(j) + ": " + e.what());
    }
  });
  result.estimate = estimate_from_trajectories(result.trajectories, opts);
  return result;
}

VolumeOracle VolumeOracle::box(const geometry::AxisAlignedBox& b) {
  VolumeOracle o;
  o.volume = [b]() { return b.volume(); };
  o.contains = [b](const Eigen::VectorXd& x) { return b.contains(x, 1e-12); };
  o.bounding_box = b;
  return o;
}

VolumeOracle VolumeOracle::ellipsoid(const geometry::Ellipsoid& e) {
  VolumeOracle o;
  o.volume = [e]() { return geometry::ellipsoid_volume(e); };
  o.contains = [e](const Eigen::VectorXd& x) { return e.contains(x, 1e-12); };
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.shape);
  const double r = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  o.bounding_box = geometry::AxisAlignedBox::centered(
      e.center, Eigen::VectorXd::Constant(e.dim(), r));
  return o;
}

double coverage(const TimestepEstimate& step, const VolumeOracle& true_set,
                std::int64_t mc_samples, std::uint64_t mc_seed) {
  const double true_vol = true_set.volume();
  if (!(true_vol > 0.0)) throw std::invalid_argument("coverage: zero true volume");
  if (!step.hull) throw std::invalid_argument("coverage: estimate carries no hull");
  const auto& hull = *step.hull;
  if (!hull.full_rank()) return 0.0;
  if (hull.dimension <= 4) return geometry::hull_volume(hull) / true_vol;

  // Common-random-number membership counts over a shared bounding box.
  geometry::AxisAlignedBox box = geometry::hull_bounding_box(hull);
  box = geometry::AxisAlignedBox(box.lower.cwiseMin(true_set.bounding_box.lower),
                                 box.upper.cwiseMax(true_set.bounding_box.upper));
  Rng rng(Rng::scramble(mc_seed));
  std::int64_t in_hull = 0, in_true = 0;
  Eigen::VectorXd x(hull.dimension);
  for (std::int64_t s = 0; s < mc_samples; ++s) {
    for (int i = 0; i < hull.dimension; ++i) x(i) = rng.uniform(box.lower(i), box.upper(i));
    if (geometry::hull_contains(hull, x)) ++in_hull;
    if (true_set.contains(x)) ++in_true;
  }
  if (in_true == 0) throw std::runtime_error("coverage: no Monte-Carlo hits in the true set");
  return static_cast<double>(in_hull) / static_cast<double>(in_true);
}

double coverage(const geometry::Ellipsoid& estimate, const VolumeOracle& true_set) {
  const double true_vol = true_set.volume();
  if (!(true_vol > 0.0)) throw std::invalid_argument("coverage: zero true volume");
  return geometry::ellipsoid_volume(estimate) / true_vol;
}

}  // namespace reachkit::randup
