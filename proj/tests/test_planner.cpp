#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "reachkit/dynamics/models.hpp"
#include "reachkit/planner/scp.hpp"
#include "test_support.hpp"

using namespace reachkit;
using namespace reachkit::planner;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v(i++) = x;
  return v;
}

// Minimum-energy control of x' = Ax + Bu to reach `goal` at step N from x0:
// u_k = B^T (A^T)^{N-1-k} G^{-1} (goal - A^N x0) with the reachability
// Gramian G. The closed-form oracle for the unconstrained planner check.
std::vector<Eigen::VectorXd> min_energy_controls(const Eigen::MatrixXd& a,
                                                 const Eigen::MatrixXd& b,
                                                 const Eigen::VectorXd& x0,
                                                 const Eigen::VectorXd& goal, int horizon) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd ak = Eigen::MatrixXd::Identity(n, n);
  std::vector<Eigen::MatrixXd> a_pow(horizon + 1);
  for (int k = 0; k <= horizon; ++k) {
    a_pow[k] = ak;
    ak = (a * ak).eval();
  }
  for (int k = 0; k < horizon; ++k) {
    const Eigen::MatrixXd phi = a_pow[horizon - 1 - k] * b;
    gram += phi * phi.transpose();
  }
  const Eigen::VectorXd lambda = gram.ldlt().solve(goal - a_pow[horizon] * x0);
  std::vector<Eigen::VectorXd> controls(horizon);
  for (int k = 0; k < horizon; ++k) {
    controls[k] = b.transpose() * a_pow[horizon - 1 - k].transpose() * lambda;
  }
  return controls;
}

OcpSpec double_integrator_spec(int horizon) {
  OcpSpec spec;
  spec.model = std::make_shared<dynamics::DoubleIntegrator>();
  spec.horizon = horizon;
  spec.mu0 = Eigen::VectorXd::Zero(4);
  spec.theta_bar = Eigen::VectorXd(0);
  spec.w_bar = Eigen::VectorXd(0);
  spec.uncertainty.x0_set = geometry::AxisAlignedBox::singleton(spec.mu0);
  spec.uncertainty.horizon = horizon;
  spec.state_bounds = geometry::AxisAlignedBox(Eigen::VectorXd::Constant(4, -kInf),
                                               Eigen::VectorXd::Constant(4, kInf));
  spec.control_bounds = geometry::AxisAlignedBox::symmetric(2, 50.0);
  spec.position_dim = 2;
  spec.cost.control_weight = Eigen::MatrixXd::Identity(2, 2);
  spec.cost.velocity_offset = 2;
  spec.cost.velocity_dim = 2;
  spec.scp.reach_method = ReachMethod::RandUp;
  spec.scp.reach_particles = 2;
  spec.scp.trust_region = 100.0;
  spec.scp.trust_region_controls = 100.0;
  spec.scp.qp_tol = 1e-9;
  return spec;
}

}  // namespace

TEST_CASE("nominal rollout") {
  // Spacecraft at rest with midpoint parameters holds its state.
  OcpSpec spec;
  spec.model = std::make_shared<dynamics::Spacecraft13>();
  spec.horizon = 5;
  spec.mu0 = Eigen::VectorXd::Zero(13);
  spec.mu0(9) = 1.0;
  spec.theta_bar = vec({7.2, 0.07, 0.07, 0.07});
  spec.w_bar = Eigen::VectorXd::Zero(13);
  const auto states =
      nominal_rollout(spec, std::vector<Eigen::VectorXd>(5, Eigen::VectorXd::Zero(6)));
  for (const auto& x : states) CHECK((x - spec.mu0).cwiseAbs().maxCoeff() == 0.0);

  // Double integrator under constant thrust follows the discrete parabola,
  // and equals the generic rollout of the same tuple.
  OcpSpec di = double_integrator_spec(4);
  std::vector<Eigen::VectorXd> controls(4, vec({0.1, 0.0}));
  const auto parabola = nominal_rollout(di, controls);
  double v = 0.0, p = 0.0;
  for (int k = 0; k <= 4; ++k) {
    CHECK(parabola[k](0) == doctest::Approx(p));
    CHECK(parabola[k](2) == doctest::Approx(v));
    p += v;
    v += 0.1;
  }
  dynamics::ParamTuple z;
  z.x0 = di.mu0;
  z.controls = controls;
  z.theta = Eigen::VectorXd(0);
  z.disturbances.assign(4, Eigen::VectorXd(0));
  const auto traj = dynamics::rollout(*di.model, z, 4);
  for (int k = 0; k <= 4; ++k) CHECK(parabola[k] == traj.states[k]);
}

TEST_CASE("bound tightening") {
  const auto bounds = geometry::AxisAlignedBox::symmetric(2, 1.0);

  const auto zero = reformulate_bounds(
      geometry::AxisAlignedBox::singleton(Eigen::VectorXd::Zero(2)), bounds);
  CHECK(zero.lower == bounds.lower);
  CHECK(zero.upper == bounds.upper);
  CHECK(zero.infeasible_dims.empty());

  const auto tight = reformulate_bounds(
      geometry::AxisAlignedBox::centered(Eigen::VectorXd::Zero(2),
                                         Eigen::VectorXd::Constant(2, 0.3)),
      bounds);
  CHECK(tight.lower(0) == doctest::Approx(-0.7));
  CHECK(tight.upper(0) == doctest::Approx(0.7));

  Eigen::VectorXd hw(2);
  hw << 1.2, 0.1;
  const auto infeasible = reformulate_bounds(
      geometry::AxisAlignedBox::centered(Eigen::VectorXd::Zero(2), hw), bounds);
  REQUIRE(infeasible.infeasible_dims.size() == 1);
  CHECK(infeasible.infeasible_dims[0] == 0);
}

TEST_CASE("obstacle linearization") {
  Obstacle sphere;
  sphere.kind = Obstacle::Kind::Sphere;
  sphere.center = Eigen::Vector3d::Zero();
  sphere.radius = 1.0;

  const geometry::Ellipsoid zero_q = geometry::Ellipsoid::point(Eigen::VectorXd::Zero(3));
  const Halfspace plain = reformulate_obstacle(zero_q, sphere, vec({2, 0, 0}));
  CHECK(plain.normal.isApprox(vec({-1, 0, 0})));
  CHECK(plain.offset == doctest::Approx(-1.0));

  const geometry::Ellipsoid q(Eigen::VectorXd::Zero(3),
                              (0.25 * Eigen::Matrix3d::Identity()).eval());
  const Halfspace backed = reformulate_obstacle(q, sphere, vec({2, 0, 0}));
  CHECK(backed.offset == doctest::Approx(-1.5));  // x >= 1.5

  // Reference exactly at the center: deterministic first-axis tie-break.
  const Halfspace tie = reformulate_obstacle(zero_q, sphere, vec({0, 0, 0}));
  CHECK(tie.normal.isApprox(vec({-1, 0, 0})));

  // Cylinder normals live in the cross-section plane.
  Obstacle cyl;
  cyl.kind = Obstacle::Kind::Cylinder;
  cyl.center = Eigen::Vector3d(1.0, 1.0, 0.0);
  cyl.radius = 0.5;
  cyl.axis = Eigen::Vector3d::UnitZ();
  const Halfspace side = reformulate_obstacle(zero_q, cyl, vec({3, 1, 7}));
  CHECK(std::abs(side.normal(2)) < 1e-12);
  CHECK(side.normal.head(2).isApprox(vec({-1, 0})));

  // Everything in the backed-off halfspace keeps the whole ellipsoid out of
  // the plain linearized halfspace.
  Rng rng(411);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd ref(3);
    for (int i = 0; i < 3; ++i) ref(i) = rng.uniform(-4, 4);
    if (ref.norm() < 1.1) continue;
    Eigen::MatrixXd m(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m(i, j) = 0.2 * rng.normal();
    }
    const geometry::Ellipsoid qe(Eigen::VectorXd::Zero(3),
                                 (m * m.transpose() + 1e-6 * Eigen::Matrix3d::Identity()).eval());
    const Halfspace tight = reformulate_obstacle(qe, sphere, ref);
    const Halfspace loose = reformulate_obstacle(
        geometry::Ellipsoid::point(Eigen::VectorXd::Zero(3)), sphere, ref);
    // A nominal point exactly on the tightened boundary.
    Eigen::VectorXd mu = ref;
    const double slack = tight.offset - tight.normal.dot(mu);
    mu += slack * tight.normal;  // unit normal
    CHECK(std::abs(tight.normal.dot(mu) - tight.offset) < 1e-9);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qe.shape);
    for (int s = 0; s < 1000; ++s) {
      Eigen::VectorXd dir(3);
      for (int i = 0; i < 3; ++i) dir(i) = rng.normal();
      dir.normalize();
      const Eigen::VectorXd e = es.operatorSqrt() * dir;
      CHECK(loose.normal.dot(mu + e) <= loose.offset + 1e-9);
    }
  }
}

TEST_CASE("QP solver basics") {
  // min x^2/2 s.t. x >= 1
  QpProblem qp;
  qp.p = Eigen::MatrixXd::Identity(1, 1);
  qp.q = Eigen::VectorXd::Zero(1);
  qp.g = -Eigen::MatrixXd::Identity(1, 1);
  qp.h = -Eigen::VectorXd::Ones(1);
  qp.a.resize(0, 1);
  qp.b.resize(0);
  auto res = solve_qp(qp);
  CHECK(res.status == QpStatus::Solved);
  CHECK(res.x(0) == doctest::Approx(1.0).epsilon(1e-5));

  // min |x|^2/2 s.t. x1 + x2 = 2
  QpProblem eq;
  eq.p = Eigen::MatrixXd::Identity(2, 2);
  eq.q = Eigen::VectorXd::Zero(2);
  eq.g.resize(0, 2);
  eq.h.resize(0);
  eq.a = Eigen::MatrixXd::Ones(1, 2);
  eq.b = vec({2});
  res = solve_qp(eq);
  CHECK(res.status == QpStatus::Solved);
  CHECK(res.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.x(1) == doctest::Approx(1.0).epsilon(1e-6));
  // Replay through the equality system stays within solver tolerance.
  CHECK((eq.a * res.x - eq.b).cwiseAbs().maxCoeff() < 1e-5);

  // Contradictory inequalities are reported, not solved.
  QpProblem bad;
  bad.p = Eigen::MatrixXd::Identity(1, 1);
  bad.q = Eigen::VectorXd::Zero(1);
  bad.g.resize(2, 1);
  bad.g << -1, 1;
  bad.h = vec({-1, 0});
  bad.a.resize(0, 1);
  bad.b.resize(0);
  CHECK(solve_qp(bad).status == QpStatus::PrimalInfeasible);

  Eigen::MatrixXd not_psd = -Eigen::MatrixXd::Identity(2, 2);
  QpProblem npsd;
  npsd.p = not_psd;
  npsd.q = Eigen::VectorXd::Zero(2);
  npsd.g.resize(0, 2);
  npsd.h.resize(0);
  npsd.a.resize(0, 2);
  npsd.b.resize(0);
  CHECK_THROWS(solve_qp(npsd));
}

TEST_CASE("QP solver agrees with independent oracles on random problems") {
  Rng rng(431);

  // Box-constrained problems against projected gradient.
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 5 + 4 * trial;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
    }
    QpProblem qp;
    qp.p = m.transpose() * m + Eigen::MatrixXd::Identity(n, n);
    qp.q = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return rng.normal(); });
    Eigen::VectorXd lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      const double a = rng.normal(), b = rng.normal();
      lo(i) = std::min(a, b);
      hi(i) = std::max(a, b);
    }
    qp.g.resize(2 * n, n);
    qp.g << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
    qp.h.resize(2 * n);
    qp.h << hi, -lo;
    qp.a.resize(0, n);
    qp.b.resize(0);
    const QpResult res = solve_qp(qp, 1e-9, 50000);
    REQUIRE(res.status == QpStatus::Solved);

    Eigen::VectorXd x = 0.5 * (lo + hi);
    const double step =
        1.0 / Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(qp.p).eigenvalues().maxCoeff();
    for (int it = 0; it < 100000; ++it) {
      x = (x - step * (qp.p * x + qp.q)).cwiseMax(lo).cwiseMin(hi);
    }
    const auto obj = [&](const Eigen::VectorXd& v) {
      return 0.5 * v.dot(qp.p * v) + qp.q.dot(v);
    };
    CHECK(std::abs(obj(res.x) - obj(x)) / std::max(1.0, std::abs(obj(x))) < 1e-5);
  }

  // Equality-constrained problems against the closed-form KKT system.
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 8 + 4 * trial;
    const int me = 2 + trial;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
    }
    QpProblem qp;
    qp.p = m.transpose() * m + Eigen::MatrixXd::Identity(n, n);
    qp.q = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return rng.normal(); });
    qp.g.resize(0, n);
    qp.h.resize(0);
    qp.a = Eigen::MatrixXd::NullaryExpr(me, n, [&](Eigen::Index, Eigen::Index) {
      return rng.normal();
    });
    qp.b = Eigen::VectorXd::NullaryExpr(me, [&](Eigen::Index) { return rng.normal(); });
    const QpResult res = solve_qp(qp, 1e-9, 50000);
    REQUIRE(res.status == QpStatus::Solved);

    Eigen::MatrixXd kkt(n + me, n + me);
    kkt.setZero();
    kkt.topLeftCorner(n, n) = qp.p;
    kkt.topRightCorner(n, me) = qp.a.transpose();
    kkt.bottomLeftCorner(me, n) = qp.a;
    Eigen::VectorXd rhs(n + me);
    rhs << -qp.q, qp.b;
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    CHECK((res.x - sol.head(n)).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("unconstrained double integrator matches the closed-form optimum") {
  const int horizon = 20;
  OcpSpec spec = double_integrator_spec(horizon);
  // Point goal at rest.
  Eigen::VectorXd goal(4);
  goal << 5.0, 3.0, 0.0, 0.0;
  spec.goal_box = geometry::AxisAlignedBox::singleton(goal);

  const ScpResult result = scp_solve(spec);
  CHECK(result.status == ScpStatus::Converged);
  CHECK(result.iterations <= 3);

  const auto oracle = min_energy_controls(dynamics::DoubleIntegrator::state_matrix(),
                                          dynamics::DoubleIntegrator::control_matrix(),
                                          spec.mu0, goal, horizon);
  for (int k = 0; k < horizon; ++k) {
    CHECK((result.controls[k] - oracle[k]).cwiseAbs().maxCoeff() < 1e-4);
  }
  CHECK((result.states.back() - goal).cwiseAbs().maxCoeff() < 1e-5);

  // Accepted iterates respected the trust region.
  for (const auto& info : result.history) {
    if (info.accepted) CHECK(info.step_norm <= 2.0 * spec.scp.trust_region + 1e-9);
  }
}

TEST_CASE("obstacle avoidance with uncertainty on a double integrator") {
  const int horizon = 12;
  OcpSpec spec = double_integrator_spec(horizon);
  spec.scp.trust_region = 6.0;
  spec.scp.trust_region_controls = 2.0;
  spec.scp.max_iterations = 25;
  spec.scp.reach_method = ReachMethod::RobUp;
  spec.scp.reach_particles = 50;
  spec.control_bounds = geometry::AxisAlignedBox::symmetric(2, 2.0);

  // Mild initial-state uncertainty.
  Eigen::VectorXd hw(4);
  hw << 0.05, 0.05, 0.01, 0.01;
  spec.uncertainty.x0_set = geometry::AxisAlignedBox::centered(spec.mu0, hw);

  Eigen::VectorXd goal_lo(4), goal_hi(4);
  goal_lo << 9.0, -1.0, -kInf, -kInf;
  goal_hi << 11.0, 1.0, kInf, kInf;
  spec.goal_box = geometry::AxisAlignedBox(goal_lo, goal_hi);

  Obstacle obs;
  obs.kind = Obstacle::Kind::Sphere;
  obs.center = Eigen::Vector3d(5.0, 0.0, 0.0);
  obs.radius = 1.5;
  spec.obstacles.push_back(obs);

  const ScpResult result = scp_solve(spec);
  REQUIRE(result.status == ScpStatus::Converged);
  for (int k = 1; k <= horizon; ++k) {
    CHECK(obs.signed_distance(result.states[k].head(2)) > 0.0);
  }
  CHECK(result.audit.particles == 1000);
  CHECK(result.audit.obstacle_violations == 0);
  CHECK(result.audit.bound_violations == 0);
}
