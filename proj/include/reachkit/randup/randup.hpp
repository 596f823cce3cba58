#pragma once

#include <functional>
#include <optional>

#include "reachkit/dynamics/model.hpp"
#include "reachkit/geometry/convex_hull.hpp"
#include "reachkit/randup/uncertainty.hpp"

namespace reachkit::randup {

/// I.i.d. parameter tuples drawn from the product set; deterministic given
/// the seed, with counter-based per-particle substreams so that growing M
/// extends the sample set without perturbing earlier particles.
std::vector<dynamics::ParamTuple> sample_params(const UncertaintySpec& spec,
                                                const SamplerConfig& cfg);
dynamics::ParamTuple sample_one(const UncertaintySpec& spec, const SamplerConfig& cfg,
                                std::uint64_t particle_index);

struct EstimateOptions {
  /// Hulls are only built up to this state dimension; the facet count of a
  /// high-dimensional hull over many points is combinatorially infeasible.
  int hull_max_dim = 8;
  bool keep_particles = true;
  int threads = 1;
};

struct TimestepEstimate {
  Eigen::MatrixXd particles;  // row per particle (empty if not kept)
  std::optional<geometry::ConvexHullSet> hull;
  geometry::AxisAlignedBox outer_box;       // centered on `center`
  geometry::Ellipsoid outer_ellipsoid;      // over all state dimensions
  Eigen::VectorXd center;                   // arithmetic particle mean
};

/// Per-timestep particle clouds and their convex-set summaries for
/// k = 0..N (index 0 holds the sampled initial states).
struct ReachEstimate {
  std::vector<TimestepEstimate> steps;
  int horizon() const { return static_cast<int>(steps.size()) - 1; }
};

struct RandupResult {
  ReachEstimate estimate;
  std::vector<dynamics::ParamTuple> tuples;
  std::vector<dynamics::Trajectory> trajectories;
};

/// Builds the per-timestep estimate from already-propagated trajectories.
ReachEstimate estimate_from_trajectories(const std::vector<dynamics::Trajectory>& trajectories,
                                         const EstimateOptions& opts = {});

/// Sampling, batch propagation and per-timestep hulls. Propagation failures
/// surface the offending particle index.
RandupResult rand_up(const dynamics::DynamicsModel& model, const UncertaintySpec& spec,
                     const SamplerConfig& cfg, const EstimateOptions& opts = {});

/// Membership/volume oracle describing a true set for coverage evaluation.
struct VolumeOracle {
  std::function<double()> volume;  // exact volume, throws if unavailable
  std::function<bool(const Eigen::VectorXd&)> contains;
  geometry::AxisAlignedBox bounding_box;

  static VolumeOracle box(const geometry::AxisAlignedBox& b);
  static VolumeOracle ellipsoid(const geometry::Ellipsoid& e);
};

/// vol(estimate at k) / vol(true set): exact hull volume for n <= 4, else
/// common-random-number Monte-Carlo membership over a shared bounding box.
double coverage(const TimestepEstimate& step, const VolumeOracle& true_set,
                std::int64_t mc_samples = 200000, std::uint64_t mc_seed = 1);
double coverage(const geometry::Ellipsoid& estimate, const VolumeOracle& true_set);

}  // namespace reachkit::randup
