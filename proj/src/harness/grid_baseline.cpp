#include "reachkit/harness/grid_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace reachkit::harness {

namespace {

struct Interval {
  double lo, hi;
};

// Total length of the union of intervals.
double union_length(std::vector<Interval> iv) {
  std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  double total = 0.0;
  double cur_lo = iv.front().lo, cur_hi = iv.front().hi;
  for (const auto& i : iv) {
    if (i.lo > cur_hi) {
      total += cur_hi - cur_lo;
      cur_lo = i.lo;
      cur_hi = i.hi;
    } else {
      cur_hi = std::max(cur_hi, i.hi);
    }
  }
  return total + (cur_hi - cur_lo);
}

// Cell centers of the delta-covering of [-1, 1] and the per-cell reach
// half-width along one dimension.
std::vector<Interval> reach_intervals(double delta, double ubar, bool inflate_cells,
                                      int* cells_out) {
  const int cells = std::max(1, static_cast<int>(std::ceil(1.0 / delta)));
  const double half = 1.0 / cells;  // actual cell half-width after rounding up
  const double reach_half = ubar + (inflate_cells ? half : 0.0);
  std::vector<Interval> iv;
  iv.reserve(cells);
  for (int i = 0; i < cells; ++i) {
    const double c = -1.0 + (2.0 * i + 1.0) * half;
    iv.push_back({c - reach_half, c + reach_half});
  }
  *cells_out = cells;
  return iv;
}

}  // namespace

GridBaselineResult grid_covering_baseline(const dynamics::AdditiveLinear& model, double delta,
                                          bool inflate_cells) {
  if (!(delta > 0.0)) throw std::invalid_argument("grid_covering_baseline: delta must be > 0");
  const int n = model.state_dim();
  const double ubar = model.control_bound();

  int cells = 0;
  const std::vector<Interval> iv = reach_intervals(delta, ubar, inflate_cells, &cells);
  // Full grid: the union of equal boxes on a lattice factors into the product
  // of per-dimension interval unions.
  const double len = union_length(iv);

  GridBaselineResult res;
  res.cells_per_dim = cells;
  res.evaluations = 1;
  for (int i = 0; i < n; ++i) res.evaluations *= cells;
  res.union_volume = std::pow(len, n);
  res.coverage = res.union_volume / std::pow(2.0 * (1.0 + ubar), n);
  return res;
}

double grid_union_volume_rasterized(const dynamics::AdditiveLinear& model, double delta,
                                    bool inflate_cells) {
  if (!(delta > 0.0)) throw std::invalid_argument("raster volume: delta must be > 0");
  const int n = model.state_dim();
  const double ubar = model.control_bound();
  int cells = 0;
  const std::vector<Interval> iv = reach_intervals(delta, ubar, inflate_cells, &cells);

  const double span = 1.0 + ubar + delta;
  const double step = delta / 10.0;
  const long bins = static_cast<long>(std::ceil(2.0 * span / step));
  long total_covered = 1;
  // Per-dimension rasterization (all dimensions are identical), combined as a
  // product; counts a bin when its midpoint falls in some interval.
  long covered = 0;
  for (long b = 0; b < bins; ++b) {
    const double x = -span + (b + 0.5) * step;
    for (const auto& i : iv) {
      if (x >= i.lo && x <= i.hi) {
        ++covered;
        break;
      }
    }
  }
  total_covered = covered;
  double vol = static_cast<double>(total_covered) * step;
  return std::pow(vol, n);
}

}  // namespace reachkit::harness
