#include "reachkit/planner/ocp.hpp"

#include <cmath>
#include <stdexcept>

namespace reachkit::planner {

double Obstacle::signed_distance(const Eigen::VectorXd& position) const {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  p.head(std::min<int>(3, static_cast<int>(position.size()))) =
      position.head(std::min<int>(3, static_cast<int>(position.size())));
  if (kind == Kind::Sphere) {
    return (p - center).norm() - radius;
  }
  const Eigen::Vector3d a = axis.normalized();
  const Eigen::Vector3d d = p - center;
  return (d - a.dot(d) * a).norm() - radius;
}

std::vector<Eigen::VectorXd> nominal_rollout(const OcpSpec& spec,
                                             const std::vector<Eigen::VectorXd>& controls) {
  if (static_cast<int>(controls.size()) != spec.horizon) {
    throw std::invalid_argument("nominal_rollout: control count must match the horizon");
  }
  dynamics::ParamTuple z;
  z.x0 = spec.mu0;
  z.controls = controls;
  z.theta = spec.theta_bar;
  z.disturbances.assign(spec.horizon, spec.w_bar);
  return dynamics::rollout(*spec.model, z, spec.horizon).states;
}

TightenedBounds reformulate_bounds(const geometry::AxisAlignedBox& reach_box,
                                   const geometry::AxisAlignedBox& bounds) {
  if (reach_box.dim() != bounds.dim()) {
    throw std::invalid_argument("reformulate_bounds: dimension mismatch");
  }
  TightenedBounds out;
  const Eigen::VectorXd delta = reach_box.half_widths();
  out.lower = bounds.lower + delta;
  out.upper = bounds.upper - delta;
  for (int i = 0; i < bounds.dim(); ++i) {
    if (out.lower(i) > out.upper(i)) out.infeasible_dims.push_back(i);
  }
  return out;
}

Halfspace reformulate_obstacle(const geometry::Ellipsoid& position_ellipsoid,
                               const Obstacle& obstacle,
                               const Eigen::VectorXd& reference_position) {
  const int s = static_cast<int>(reference_position.size());
  Eigen::Vector3d ref = Eigen::Vector3d::Zero();
  ref.head(std::min(3, s)) = reference_position.head(std::min(3, s));

  Eigen::Vector3d dir;
  if (obstacle.kind == Obstacle::Kind::Sphere) {
    dir = ref - obstacle.center;
  } else {
    const Eigen::Vector3d a = obstacle.axis.normalized();
    const Eigen::Vector3d d = ref - obstacle.center;
    dir = d - a.dot(d) * a;  // cross-section plane component
  }
  if (dir.norm() < 1e-12) {
    dir = Eigen::Vector3d::UnitX();  // deterministic tie-break at the center
    if (obstacle.kind == Obstacle::Kind::Cylinder) {
      const Eigen::Vector3d a = obstacle.axis.normalized();
      dir = (dir - a.dot(dir) * a);
      if (dir.norm() < 1e-12) dir = Eigen::Vector3d::UnitY();
      dir.normalize();
    }
  } else {
    dir.normalize();
  }

  // Keep-out side: dir . (p - center) >= radius, i.e. -dir . p <= -radius - dir . center.
  Halfspace hs;
  hs.normal = -dir.head(s);
  hs.offset = -obstacle.radius - dir.head(s).dot(obstacle.center.head(s));
  // Back-off by the support of the positional ellipsoid along the normal.
  const double backoff =
      std::sqrt(std::max(0.0, hs.normal.dot(position_ellipsoid.shape * hs.normal)));
  hs.offset -= backoff;
  return hs;
}

}  // namespace reachkit::planner
