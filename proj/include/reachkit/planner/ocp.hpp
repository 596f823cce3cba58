#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "reachkit/dynamics/model.hpp"
#include "reachkit/geometry/box.hpp"
#include "reachkit/geometry/ellipsoid.hpp"
#include "reachkit/randup/uncertainty.hpp"
#include "reachkit/robup/robup.hpp"

namespace reachkit::planner {

struct Obstacle {
  enum class Kind { Sphere, Cylinder };
  Kind kind = Kind::Sphere;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 1.0;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // cylinders only

  /// Signed distance of a position to the obstacle surface (> 0 outside).
  double signed_distance(const Eigen::VectorXd& position) const;
};

struct CostSpec {
  Eigen::MatrixXd control_weight;        // R in sum u^T R u
  double terminal_velocity_weight = 0.0; // w in w * |v_N|^2
  int velocity_offset = 0;               // first velocity component in the state
  int velocity_dim = 0;
};

enum class ReachMethod { RandUp, RobUp };

struct ScpParams {
  int max_iterations = 15;
  double convergence_tol = 1e-4;     // on |mu' - mu| + |u' - u| (inf norms)
  double trust_region = 0.0;         // 0: 10% of the state-range diameter
  double trust_region_controls = 0.0;  // 0: control-range diameter
  double penalty_weight = 100.0;     // merit weight on nominal constraint violation
  double qp_tol = 1e-7;
  int qp_max_iterations = 40000;
  ReachMethod reach_method = ReachMethod::RobUp;
  int reach_particles = 100;
  int reach_adv_iterations = 1;
  double reach_step_size = 1.0;
  std::uint64_t reach_seed = 0;
  std::uint64_t audit_seed = 1234567;
  int audit_particles = 1000;
  int threads = 1;
};

struct OcpSpec {
  std::shared_ptr<const dynamics::DynamicsModel> model;
  randup::UncertaintySpec uncertainty;  // X0, Theta, W blocks; control sets unused
  Eigen::VectorXd mu0;                  // fixed nominal initial state
  Eigen::VectorXd theta_bar;            // nominal parameters (inside Theta)
  Eigen::VectorXd w_bar;                // nominal disturbance (one vector, reused)
  geometry::AxisAlignedBox state_bounds;
  geometry::AxisAlignedBox control_bounds;
  geometry::AxisAlignedBox goal_box;  // at k = N; +-inf entries are inactive
  std::vector<Obstacle> obstacles;
  int position_dim = 0;  // obstacles act on the first position_dim components
  CostSpec cost;
  ScpParams scp;
  int horizon = 0;
};

/// Exact nominal rollout mu_{k+1} = f(mu_k, u_k, theta_bar, w_bar).
std::vector<Eigen::VectorXd> nominal_rollout(const OcpSpec& spec,
                                             const std::vector<Eigen::VectorXd>& controls);

struct TightenedBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<int> infeasible_dims;  // dimensions where the back-off exceeds the width
};

/// Per-dimension tightening lower + delta <= mu <= upper - delta with the
/// back-offs taken from the reach estimate's outer box. Infeasibility is a
/// returned flag, not an error.
TightenedBounds reformulate_bounds(const geometry::AxisAlignedBox& reach_box,
                                   const geometry::AxisAlignedBox& bounds);

struct Halfspace {
  Eigen::VectorXd normal;  // acts on the position block
  double offset = 0.0;     // normal . p <= offset
};

/// Linearized obstacle-avoidance halfspace at the reference position, backed
/// off by sqrt(a^T Q a) for the positional uncertainty ellipsoid Q.
Halfspace reformulate_obstacle(const geometry::Ellipsoid& position_ellipsoid,
                               const Obstacle& obstacle, const Eigen::VectorXd& reference_position);

}  // namespace reachkit::planner
