#pragma once

#include "reachkit/dynamics/models.hpp"
#include "reachkit/geometry/box.hpp"

namespace reachkit::harness {

struct GridBaselineResult {
  double union_volume = 0.0;
  double coverage = 0.0;   // vs the true reach box volume (2(1+ubar))^n
  long evaluations = 0;    // number of grid cells (oracle calls)
  int cells_per_dim = 0;
};

/// Grid-covering baseline for the one-step additive linear system
/// x1 = x0 + u0, x0 in [-1,1]^n, u0 in [-ubar, ubar]^n. A delta-covering of
/// X0 places ceil(1/delta) cell centers per dimension; each contributes an
/// exact one-step reach box. With `inflate_cells` the per-cell reach is
/// cell (+) U (exact for this system, union equals the true set at any
/// resolution); without it the reach is taken from the cell center only,
/// {c} (+) U, whose union converges as delta shrinks at a rate governed by
/// ubar. The union volume is exact: on a full grid the union is a product of
/// per-dimension interval unions.
GridBaselineResult grid_covering_baseline(const dynamics::AdditiveLinear& model, double delta,
                                          bool inflate_cells = false);

/// Rasterized union volume at resolution delta/10, the brute-force
/// cross-check for the product-structure computation (n <= 3 recommended).
double grid_union_volume_rasterized(const dynamics::AdditiveLinear& model, double delta,
                                    bool inflate_cells = false);

}  // namespace reachkit::harness
