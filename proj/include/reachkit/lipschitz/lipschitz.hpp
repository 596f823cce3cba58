#pragma once

#include <functional>
#include <vector>

#include "reachkit/geometry/ellipsoid.hpp"

namespace reachkit::lipschitz {

/// Residual dynamics x' = h(x) + g(x) with affine h(x) = H x + h0 and g
/// Lipschitz continuous component-wise: |g_i(x) - g_i(y)| <= L_i |x - y|_2.
struct LipschitzModelInfo {
  Eigen::MatrixXd affine_map;  // H
  Eigen::VectorXd affine_offset;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;  // g
  Eigen::VectorXd lipschitz_constants;  // L_i >= 0, one per output component

  /// The printed deviation bound uses lambda_max(Q) where the tight Euclidean
  /// radius of B(0, Q) is sqrt(lambda_max(Q)). The sound sqrt convention is
  /// the default; the literal one is kept as a compatibility switch.
  bool paper_literal = false;

  int dim() const { return static_cast<int>(affine_map.rows()); }
};

/// One guaranteed outer step: mu' = H mu + h0 + g(mu), Q' from the trace-rule
/// Minkowski bound of H Q H^T and the Lipschitz deviation box.
geometry::Ellipsoid lipschitz_step(const LipschitzModelInfo& info, const geometry::Ellipsoid& e);

/// Iterated steps; infos may vary per timestep (open-loop controls folded
/// into g). Throws if the shape matrix overflows, reporting the step index.
std::vector<geometry::Ellipsoid> lipschitz_propagate(const std::vector<LipschitzModelInfo>& infos,
                                                     const geometry::Ellipsoid& e0);
std::vector<geometry::Ellipsoid> lipschitz_propagate(const LipschitzModelInfo& info,
                                                     const geometry::Ellipsoid& e0, int horizon);

}  // namespace reachkit::lipschitz
