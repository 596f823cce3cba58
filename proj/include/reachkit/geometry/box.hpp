#pragma once

#include <Eigen/Dense>

namespace reachkit::geometry {

/// Axis-aligned box { x : lower <= x <= upper }, possibly zero-width in
/// some (or all) dimensions. Zero-width boxes encode singleton sets.
struct AxisAlignedBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  AxisAlignedBox() = default;
  AxisAlignedBox(Eigen::VectorXd lo, Eigen::VectorXd hi);

  static AxisAlignedBox centered(const Eigen::VectorXd& center,
                                 const Eigen::VectorXd& half_widths);
  /// [-r, r]^n
  static AxisAlignedBox symmetric(int dim, double r);
  /// Zero-width box at a point.
  static AxisAlignedBox singleton(const Eigen::VectorXd& p);

  int dim() const { return static_cast<int>(lower.size()); }
  Eigen::VectorXd center() const { return 0.5 * (lower + upper); }
  Eigen::VectorXd half_widths() const { return 0.5 * (upper - lower); }
  double volume() const;

  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;
  AxisAlignedBox head(int s) const;  // restriction to the first s coordinates
};

/// Component-wise clamp of z onto the box; the Euclidean projection.
Eigen::VectorXd project_box(const Eigen::VectorXd& z, const AxisAlignedBox& box);

/// Smallest box centered at `center` containing all points (rows of `points`).
AxisAlignedBox outer_box(const Eigen::MatrixXd& points, const Eigen::VectorXd& center);

}  // namespace reachkit::geometry
