#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "reachkit/geometry/box.hpp"

namespace reachkit::geometry {

/// One facet of a convex hull: the halfspace normal . x <= offset, with the
/// facet itself the simplex spanned by `vertex_ids`. Coordinates live in the
/// hull's span frame (identical to ambient coordinates for full-rank hulls).
struct HullFacet {
  std::vector<int> vertex_ids;  // indices into the original input points
  Eigen::VectorXd normal;       // unit outward normal
  double offset = 0.0;
};

/// Convex hull of a finite point set in general dimension. When the input
/// cloud has affine rank r < n, the hull is built inside its affine span and
/// flagged with degenerate_rank = r; facet data then refers to span
/// coordinates y = span_basis^T (x - span_origin).
struct ConvexHullSet {
  int dimension = 0;        // ambient dimension n
  int degenerate_rank = 0;  // affine rank r of the input cloud (r == n: full)
  std::vector<Eigen::VectorXd> vertices;  // extreme points, ambient coordinates
  std::vector<int> vertex_ids;            // their indices in the input cloud
  std::vector<HullFacet> facets;

  // Affine chart of the span; identity chart when full-rank.
  Eigen::VectorXd span_origin;
  Eigen::MatrixXd span_basis;  // n x r, orthonormal columns

  bool full_rank() const { return degenerate_rank == dimension; }
  Eigen::VectorXd to_span(const Eigen::VectorXd& x) const;
  /// Distance from x to the affine span (0 for full-rank hulls).
  double span_residual(const Eigen::VectorXd& x) const;
};

/// Facet classification tolerance, absolute in state units.
inline constexpr double kHullTol = 1e-9;

/// Incremental quickhull in the affine span of the points. Requires at least
/// one point; all points must share one dimension.
ConvexHullSet convex_hull(const std::vector<Eigen::VectorXd>& points);
ConvexHullSet convex_hull(const Eigen::MatrixXd& points);  // rows are points

/// True iff all facet inequalities hold within tol; degenerate hulls also
/// require x to lie in the affine span within tol.
bool hull_contains(const ConvexHullSet& hull, const Eigen::VectorXd& x, double tol = kHullTol);

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero for exact results
};

/// Exact volume by simplicial decomposition of the facets against an interior
/// point for n <= 4; Monte-Carlo over the outer bounding box above that.
/// Degenerate hulls raise an error ("zero volume / degenerate").
double hull_volume(const ConvexHullSet& hull);
VolumeEstimate hull_volume_mc(const ConvexHullSet& hull, std::int64_t samples, std::uint64_t seed);

/// Axis-aligned bounding box of the hull vertices.
AxisAlignedBox hull_bounding_box(const ConvexHullSet& hull);

}  // namespace reachkit::geometry
