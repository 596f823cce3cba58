#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "reachkit/dynamics/models.hpp"
#include "reachkit/lipschitz/lipschitz.hpp"
#include "reachkit/randup/randup.hpp"
#include "test_support.hpp"

using namespace reachkit;
using namespace reachkit::lipschitz;

namespace {

// The double-integrator residual split x' = h(x) + g(x) with h(x) = x and a
// fixed open-loop control folded into g; the true component-wise constants
// are (1, 1, 0, 0).
LipschitzModelInfo di_info(const Eigen::Vector2d& u, bool literal = false) {
  LipschitzModelInfo info;
  info.affine_map = Eigen::MatrixXd::Identity(4, 4);
  info.affine_offset = Eigen::VectorXd::Zero(4);
  info.residual = [u](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(4);
    g << x(2), x(3), u(0), u(1);
    return g;
  };
  info.lipschitz_constants = Eigen::VectorXd::Zero(4);
  info.lipschitz_constants(0) = 1.0;
  info.lipschitz_constants(1) = 1.0;
  info.paper_literal = literal;
  return info;
}

Eigen::VectorXd sample_in_ellipsoid(Rng& rng, const geometry::Ellipsoid& e) {
  const int n = e.dim();
  Eigen::VectorXd dir(n);
  for (int i = 0; i < n; ++i) dir(i) = rng.normal();
  dir.normalize();
  const double r = std::pow(rng.uniform01(), 1.0 / n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.shape);
  return e.center + es.operatorSqrt() * (r * dir);
}

geometry::Ellipsoid initial_set() {
  Eigen::VectorXd mu(4);
  mu << 1.0, -2.0, 0.3, 0.1;
  return {mu, Eigen::Vector4d(1e-2, 1e-2, 2e-3, 2e-3).asDiagonal()};
}

}  // namespace

TEST_CASE("pure affine maps propagate exactly") {
  LipschitzModelInfo info;
  info.affine_map = Eigen::MatrixXd::Identity(3, 3);
  info.affine_offset = Eigen::VectorXd::Constant(3, 0.5);
  info.residual = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(3); };
  info.lipschitz_constants = Eigen::VectorXd::Zero(3);

  const geometry::Ellipsoid e0(Eigen::VectorXd::Zero(3), Eigen::Vector3d(1, 2, 3).asDiagonal());
  const geometry::Ellipsoid e1 = lipschitz_step(info, e0);
  CHECK(e1.shape.isApprox(e0.shape, 1e-12));
  CHECK((e1.center - info.affine_offset).norm() < 1e-12);

  const auto tube = lipschitz_propagate(info, e0, 5);
  for (const auto& e : tube) CHECK(e.shape.isApprox(e0.shape, 1e-12));
}

TEST_CASE("hand-evaluated scalar step") {
  // n = 1, H = 1, L = 1, Q = 1: both radius conventions agree at lambda = 1,
  // Q_nom = 1, Q_g = 1, c = 1, so Q' = 2 * 1 + 2 * 1 = 4.
  LipschitzModelInfo info;
  info.affine_map = Eigen::MatrixXd::Identity(1, 1);
  info.affine_offset = Eigen::VectorXd::Zero(1);
  info.residual = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); };
  info.lipschitz_constants = Eigen::VectorXd::Ones(1);
  const geometry::Ellipsoid e0 = geometry::Ellipsoid::unit_ball(1);
  CHECK(lipschitz_step(info, e0).shape(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
  info.paper_literal = true;
  CHECK(lipschitz_step(info, e0).shape(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("one-step containment on the double-integrator residual") {
  const Eigen::Vector2d u(0.05, -0.02);
  const LipschitzModelInfo info = di_info(u);
  const geometry::Ellipsoid e0 = initial_set();
  const geometry::Ellipsoid e1 = lipschitz_step(info, e0);

  dynamics::DoubleIntegrator model;
  Rng rng(311);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXd x = sample_in_ellipsoid(rng, e0);
    const Eigen::VectorXd next = model.step(x, u, Eigen::VectorXd(0), Eigen::VectorXd(0));
    CHECK(e1.contains(next, 1e-9));
  }
}

TEST_CASE("multi-step soundness over sampled trajectories") {
  const int horizon = 5;
  Rng rng(313);
  std::vector<LipschitzModelInfo> infos;
  std::vector<Eigen::Vector2d> controls;
  for (int k = 0; k < horizon; ++k) {
    controls.emplace_back(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));
    infos.push_back(di_info(controls.back()));
  }
  const geometry::Ellipsoid e0 = initial_set();
  const auto tube = lipschitz_propagate(infos, e0);
  REQUIRE(tube.size() == horizon + 1);

  dynamics::DoubleIntegrator model;
  int violations = 0;
  for (int j = 0; j < 1000; ++j) {
    Eigen::VectorXd x = sample_in_ellipsoid(rng, e0);
    for (int k = 0; k < horizon; ++k) {
      x = model.step(x, controls[k], Eigen::VectorXd(0), Eigen::VectorXd(0));
      if (!tube[k + 1].contains(x, 1e-9)) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("conservatism ratios on the coverage setup match the printed table") {
  // True reachable sets of the linear system are affine images of the
  // initial ellipsoid; the literal radius convention reproduces the printed
  // growth within a factor of two: about (1.7, 3.2, 18, 65) x the true
  // volume at k = (1, 2, 4, 5).
  const int horizon = 5;
  const Eigen::Vector2d u(0.03, -0.06);
  std::vector<LipschitzModelInfo> literal(horizon, di_info(u, true));
  std::vector<LipschitzModelInfo> sound(horizon, di_info(u, false));
  const geometry::Ellipsoid e0 = initial_set();
  const auto tube_literal = lipschitz_propagate(literal, e0);
  const auto tube_sound = lipschitz_propagate(sound, e0);

  const Eigen::MatrixXd a = dynamics::DoubleIntegrator::state_matrix();
  Eigen::MatrixXd ak = Eigen::MatrixXd::Identity(4, 4);
  std::vector<double> ratio_literal(horizon + 1), ratio_sound(horizon + 1);
  for (int k = 0; k <= horizon; ++k) {
    const geometry::Ellipsoid true_set(Eigen::VectorXd::Zero(4),
                                       (ak * e0.shape * ak.transpose()).eval());
    ratio_literal[k] =
        geometry::ellipsoid_volume(tube_literal[k]) / geometry::ellipsoid_volume(true_set);
    ratio_sound[k] =
        geometry::ellipsoid_volume(tube_sound[k]) / geometry::ellipsoid_volume(true_set);
    ak = (a * ak).eval();
  }
  CHECK(ratio_literal[0] == doctest::Approx(1.0));
  const double expected[4] = {1.70, 3.21, 18.24, 65.42};
  const int ks[4] = {1, 2, 4, 5};
  for (int i = 0; i < 4; ++i) {
    CHECK(ratio_literal[ks[i]] > 0.5 * expected[i]);
    CHECK(ratio_literal[ks[i]] < 2.0 * expected[i]);
  }
  // The sound convention is at least as conservative here (all eigenvalues
  // of the shape matrices are below one).
  for (int k = 1; k <= horizon; ++k) {
    CHECK(ratio_sound[k] >= ratio_literal[k]);
    CHECK(ratio_sound[k] >= 1.0);
  }
}

TEST_CASE("growing a Lipschitz constant never shrinks the tube") {
  const Eigen::Vector2d u(0.0, 0.0);
  const geometry::Ellipsoid e0 = initial_set();
  double prev = 0.0;
  for (double l : {0.5, 1.0, 2.0, 4.0}) {
    LipschitzModelInfo info = di_info(u);
    info.lipschitz_constants(0) = l;
    const auto tube = lipschitz_propagate(info, e0, 3);
    const double vol = geometry::ellipsoid_volume(tube.back());
    CHECK(vol >= prev);
    prev = vol;
  }
}

TEST_CASE("zero uncertainty with zero constants gives the nominal point trajectory") {
  const Eigen::Vector2d u(0.05, -0.02);
  LipschitzModelInfo info = di_info(u);
  info.lipschitz_constants.setZero();
  Eigen::VectorXd mu(4);
  mu << 1.0, 2.0, 0.1, -0.3;
  const geometry::Ellipsoid e0 = geometry::Ellipsoid::point(mu);
  const auto tube = lipschitz_propagate(info, e0, 4);

  dynamics::DoubleIntegrator model;
  Eigen::VectorXd x = mu;
  for (int k = 0; k <= 4; ++k) {
    CHECK(tube[k].shape.cwiseAbs().maxCoeff() == 0.0);
    CHECK((tube[k].center - x).norm() < 1e-12);
    if (k < 4) x = model.step(x, u, Eigen::VectorXd(0), Eigen::VectorXd(0));
  }
}

TEST_CASE("overflow reports the step index") {
  LipschitzModelInfo info;
  info.affine_map = Eigen::MatrixXd::Identity(2, 2);
  info.affine_offset = Eigen::VectorXd::Zero(2);
  info.residual = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2); };
  info.lipschitz_constants = Eigen::VectorXd::Constant(2, 1e200);
  try {
    lipschitz_propagate(info, geometry::Ellipsoid::unit_ball(2), 10);
    FAIL("expected overflow");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}
