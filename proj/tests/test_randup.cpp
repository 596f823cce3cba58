#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "reachkit/dynamics/models.hpp"
#include "reachkit/randup/randup.hpp"
#include "test_support.hpp"

using namespace reachkit;
using namespace reachkit::randup;

namespace {

UncertaintySpec linear_spec(int n, double ubar) {
  UncertaintySpec spec;
  spec.x0_set = geometry::AxisAlignedBox::symmetric(n, 1.0);
  spec.control_sets = {geometry::AxisAlignedBox::symmetric(n, ubar)};
  spec.horizon = 1;
  return spec;
}

// Sorted vertex fingerprint for hull equality checks.
std::vector<std::vector<double>> vertex_fingerprint(const geometry::ConvexHullSet& hull) {
  std::vector<std::vector<double>> out;
  for (const auto& v : hull.vertices) {
    out.emplace_back(v.data(), v.data() + v.size());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("uniform samples fill the box with the right mean") {
  UncertaintySpec spec = linear_spec(2, 0.5);
  SamplerConfig cfg;
  cfg.seed = 7;
  cfg.particles = 100000;
  const auto tuples = sample_params(spec, cfg);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  const auto& box = std::get<geometry::AxisAlignedBox>(spec.x0_set);
  for (const auto& z : tuples) {
    CHECK(box.contains(z.x0));
    CHECK(spec.control_sets[0].contains(z.controls[0]));
    mean += z.x0;
  }
  mean /= cfg.particles;
  // Mean of U(-1,1) has sigma = (1/sqrt(3)) / sqrt(M) per component.
  const double three_sigma = 3.0 / std::sqrt(3.0 * cfg.particles);
  CHECK(std::abs(mean(0)) < three_sigma);
  CHECK(std::abs(mean(1)) < three_sigma);
}

TEST_CASE("singleton control sets pin every tuple to the same sequence") {
  UncertaintySpec spec;
  spec.x0_set = geometry::AxisAlignedBox::symmetric(2, 1.0);
  Eigen::VectorXd u0(2), u1(2);
  u0 << 0.3, -0.1;
  u1 << -0.2, 0.4;
  spec.control_sets = UncertaintySpec::singleton_controls({u0, u1});
  spec.horizon = 2;
  SamplerConfig cfg;
  cfg.particles = 50;
  for (const auto& z : sample_params(spec, cfg)) {
    CHECK(z.controls[0] == u0);
    CHECK(z.controls[1] == u1);
  }
}

TEST_CASE("beta(0.1, 0.1) concentrates mass at the extremes") {
  UncertaintySpec spec = linear_spec(1, 0.5);
  SamplerConfig cfg;
  cfg.seed = 11;
  cfg.particles = 100000;
  cfg.x0_dist = BlockDistribution::beta_shape(0.1, 0.1);
  int extreme = 0;
  for (const auto& z : sample_params(spec, cfg)) {
    if (std::abs(z.x0(0)) > 0.9) ++extreme;
  }
  CHECK(static_cast<double>(extreme) / cfg.particles > 0.6);
}

TEST_CASE("ellipsoidal initial sets sample inside the set") {
  UncertaintySpec spec;
  Eigen::VectorXd mu(3);
  mu << 1.0, -2.0, 0.5;
  const geometry::Ellipsoid ell(mu, Eigen::Vector3d(4.0, 1.0, 0.25).asDiagonal());
  spec.x0_set = ell;
  spec.control_sets = UncertaintySpec::singleton_controls({Eigen::VectorXd::Zero(3)});
  spec.horizon = 1;
  SamplerConfig cfg;
  cfg.seed = 13;
  cfg.particles = 10000;
  double max_m = 0.0;
  for (const auto& z : sample_params(spec, cfg)) {
    const double m = ell.mahalanobis_sq(z.x0);
    CHECK(m <= 1.0 + 1e-12);
    max_m = std::max(max_m, m);
  }
  CHECK(max_m > 0.9);  // the boundary region is actually reached
}

TEST_CASE("two extreme samples recover the exact 1D reachable interval") {
  dynamics::AdditiveLinear model(1, 0.5);
  std::vector<dynamics::Trajectory> trajectories;
  for (const auto& [x0, u0] : {std::pair{-1.0, -0.5}, std::pair{1.0, 0.5}}) {
    dynamics::ParamTuple z;
    z.x0 = Eigen::VectorXd::Constant(1, x0);
    z.controls = {Eigen::VectorXd::Constant(1, u0)};
    z.disturbances = {Eigen::VectorXd(0)};
    z.theta = Eigen::VectorXd(0);
    trajectories.push_back(dynamics::rollout(model, z, 1));
  }
  const ReachEstimate est = estimate_from_trajectories(trajectories);
  REQUIRE(est.steps[1].hull.has_value());
  CHECK(est.steps[1].outer_box.lower(0) == doctest::Approx(-1.5));
  CHECK(est.steps[1].outer_box.upper(0) == doctest::Approx(1.5));
  CHECK(geometry::hull_volume(*est.steps[1].hull) == doctest::Approx(3.0));
}

TEST_CASE("3D hull volume approaches the true reachable volume monotonically") {
  dynamics::AdditiveLinear model(3, 0.5);
  const UncertaintySpec spec = linear_spec(3, 0.5);
  SamplerConfig cfg;
  cfg.seed = 17;
  double prev = 0.0;
  for (int m : {100, 1000, 10000}) {
    cfg.particles = m;
    const RandupResult rr = rand_up(model, spec, cfg);
    const double vol = geometry::hull_volume(*rr.estimate.steps[1].hull) / 27.0;
    CHECK(vol >= prev);  // nested prefixes per the counter-based sampler
    CHECK(vol <= 1.0 + 1e-12);
    prev = vol;
  }
  CHECK(prev > 0.9);
}

TEST_CASE("double integrator particles stay in their hulls") {
  dynamics::DoubleIntegrator model;
  UncertaintySpec spec;
  Eigen::VectorXd mu0(4);
  mu0 << 0, 0, 0.5, -0.2;
  Eigen::MatrixXd q0 = Eigen::Vector4d(0.01, 0.01, 0.002, 0.002).asDiagonal();
  spec.x0_set = geometry::Ellipsoid(mu0, q0);
  std::vector<Eigen::VectorXd> controls(10, Eigen::VectorXd::Zero(2));
  controls[3] << 0.1, -0.05;
  spec.control_sets = UncertaintySpec::singleton_controls(controls);
  spec.horizon = 10;
  SamplerConfig cfg;
  cfg.seed = 19;
  cfg.particles = 300;
  const RandupResult rr = rand_up(model, spec, cfg);
  const auto& step5 = rr.estimate.steps[5];
  REQUIRE(step5.hull.has_value());
  for (int j = 0; j < cfg.particles; ++j) {
    CHECK(geometry::hull_contains(*step5.hull, step5.particles.row(j).transpose(), 1e-9));
    CHECK(step5.outer_box.contains(step5.particles.row(j).transpose(), 1e-12));
    CHECK(step5.outer_ellipsoid.contains(step5.particles.row(j).transpose(), 1e-9));
  }
}

TEST_CASE("coverage on crafted hulls") {
  // Hull equal to the true box.
  std::vector<Eigen::VectorXd> corners;
  for (double x : {-1.0, 1.0}) {
    for (double y : {-1.0, 1.0}) {
      Eigen::VectorXd p(2);
      p << x, y;
      corners.push_back(p);
    }
  }
  TimestepEstimate step;
  step.hull = geometry::convex_hull(corners);
  const VolumeOracle oracle = VolumeOracle::box(geometry::AxisAlignedBox::symmetric(2, 1.0));
  CHECK(coverage(step, oracle) == doctest::Approx(1.0));

  // Half-width box in 2D covers a quarter of the volume.
  std::vector<Eigen::VectorXd> half;
  for (const auto& c : corners) half.push_back(0.5 * c);
  step.hull = geometry::convex_hull(half);
  CHECK(coverage(step, oracle) == doctest::Approx(0.25));

  CHECK_THROWS(coverage(step, VolumeOracle::box(geometry::AxisAlignedBox(
                                  Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)))));
}

TEST_CASE("nested prefixes give monotone hulls and coverage") {
  dynamics::AdditiveLinear model(2, 0.5);
  const UncertaintySpec spec = linear_spec(2, 0.5);
  const geometry::AxisAlignedBox true_box = geometry::AxisAlignedBox::symmetric(2, 1.5);
  const VolumeOracle oracle = VolumeOracle::box(true_box);

  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    SamplerConfig cfg;
    cfg.seed = seed;
    geometry::ConvexHullSet prev_hull;
    double prev_cov = -1.0;
    bool first = true;
    for (int m : {100, 1000, 10000}) {
      cfg.particles = m;
      const RandupResult rr = rand_up(model, spec, cfg);
      const auto& hull = *rr.estimate.steps[1].hull;
      // Inner approximation: vertices inside the true (convex) reachable box.
      for (const auto& v : hull.vertices) CHECK(true_box.contains(v, 1e-12));
      // Nested-prefix monotonicity: previous hull contained in the new one.
      if (!first) {
        for (const auto& v : prev_hull.vertices) CHECK(geometry::hull_contains(hull, v, 1e-9));
      }
      const double cov = coverage(rr.estimate.steps[1], oracle);
      CHECK(cov > prev_cov);
      prev_cov = cov;
      prev_hull = hull;
      first = false;
    }
    CHECK(prev_cov > 0.95);
  }
}

TEST_CASE("estimator is exchangeable under particle permutation") {
  dynamics::AdditiveLinear model(2, 0.5);
  const UncertaintySpec spec = linear_spec(2, 0.5);
  SamplerConfig cfg;
  cfg.seed = 23;
  cfg.particles = 200;
  RandupResult rr = rand_up(model, spec, cfg);

  std::vector<dynamics::Trajectory> shuffled = rr.trajectories;
  Rng rng(29);
  for (size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[rng.next_u64() % i]);
  }
  const ReachEstimate permuted = estimate_from_trajectories(shuffled);
  CHECK(vertex_fingerprint(*permuted.steps[1].hull) ==
        vertex_fingerprint(*rr.estimate.steps[1].hull));
}

TEST_CASE("a single particle gives singleton hulls") {
  dynamics::AdditiveLinear model(2, 0.5);
  const UncertaintySpec spec = linear_spec(2, 0.5);
  SamplerConfig cfg;
  cfg.seed = 31;
  cfg.particles = 1;
  const RandupResult rr = rand_up(model, spec, cfg);
  for (int k = 0; k <= 1; ++k) {
    const auto& hull = *rr.estimate.steps[k].hull;
    CHECK(hull.degenerate_rank == 0);
    CHECK(hull.vertices.size() == 1);
    CHECK((hull.vertices[0] - rr.trajectories[0].states[k]).norm() == 0.0);
  }
}

TEST_CASE("high-dimensional estimates skip hull construction") {
  dynamics::Spacecraft13 model;
  UncertaintySpec spec;
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(13);
  x0(9) = 1.0;
  spec.x0_set = geometry::AxisAlignedBox::centered(x0, Eigen::VectorXd::Constant(13, 0.01));
  spec.control_sets = UncertaintySpec::singleton_controls(
      std::vector<Eigen::VectorXd>(3, Eigen::VectorXd::Zero(6)));
  Eigen::VectorXd tlo(4), thi(4);
  tlo << 7.1, 0.065, 0.065, 0.065;
  thi << 7.3, 0.075, 0.075, 0.075;
  spec.theta_set = geometry::AxisAlignedBox(tlo, thi);
  spec.horizon = 3;
  SamplerConfig cfg;
  cfg.particles = 50;
  const RandupResult rr = rand_up(model, spec, cfg);
  CHECK_FALSE(rr.estimate.steps[3].hull.has_value());
  CHECK(rr.estimate.steps[3].outer_box.dim() == 13);
}

TEST_CASE("reach estimate serialization keeps the declared shape") {
  dynamics::AdditiveLinear model(2, 0.5);
  SamplerConfig cfg;
  cfg.particles = 20;
  const RandupResult rr = rand_up(model, linear_spec(2, 0.5), cfg);
  // Serialization lives in the harness; here we only pin the estimate shape.
  CHECK(rr.estimate.horizon() == 1);
  CHECK(rr.estimate.steps[0].particles.rows() == 20);
  CHECK(rr.estimate.steps[1].center.size() == 2);
}
