#pragma once

#include <Eigen/Dense>

#include "reachkit/geometry/box.hpp"

namespace reachkit::geometry {

/// Ellipsoidal set { x : (x - center)^T shape^{-1} (x - center) <= 1 } with
/// symmetric positive-semidefinite shape matrix. Zero-eigenvalue directions
/// admit only the center in that direction (pseudo-inverse convention).
struct Ellipsoid {
  Eigen::VectorXd center;
  Eigen::MatrixXd shape;

  Ellipsoid() = default;
  Ellipsoid(Eigen::VectorXd mu, Eigen::MatrixXd q);

  static Ellipsoid unit_ball(int dim);
  static Ellipsoid point(const Eigen::VectorXd& mu);

  int dim() const { return static_cast<int>(center.size()); }

  /// Mahalanobis membership with the PSD pseudo-inverse convention.
  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const;

  /// (x-mu)^T Q^{-1} (x-mu); requires Q positive definite.
  double mahalanobis_sq(const Eigen::VectorXd& x) const;
};

/// Volume pi^{n/2} / Gamma(n/2 + 1) * sqrt(det Q). Requires Q positive definite.
double ellipsoid_volume(const Ellipsoid& e);

/// Ellipsoid outer-approximating the first s coordinates of the box via
/// Q = s * diag(delta_i^2). Zero half-widths are floored at 1e-12 so Q stays
/// invertible.
Ellipsoid box_to_ellipsoid(const AxisAlignedBox& box, int s);

/// Outer ellipsoid for the Minkowski sum of two origin-centered ellipsoids,
/// Q = (1 + 1/c) Q1 + (1 + c) Q2 with c = sqrt(tr Q1 / tr Q2). Exact when the
/// operands are equal balls; degenerate summands (zero trace) pass through.
Ellipsoid minkowski_outer(const Ellipsoid& e1, const Ellipsoid& e2);

/// Euclidean projection of z onto the ellipsoid (Q positive definite), by
/// Newton root-finding on the scalar dual variable of the KKT system.
Eigen::VectorXd project_ellipsoid(const Eigen::VectorXd& z, const Ellipsoid& e);

}  // namespace reachkit::geometry
