#include "reachkit/geometry/convex_hull.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>

#include "reachkit/rng.hpp"

namespace reachkit::geometry {

namespace {

// Working facet of the incremental construction.
struct Facet {
  std::vector<int> verts;      // r point indices (into the span cloud)
  Eigen::VectorXd normal;      // unit outward normal (span coordinates)
  double offset = 0.0;         // normal . x <= offset on the hull
  std::vector<int> neighbors;  // neighbors[i] shares the ridge opposite verts[i]
  std::vector<int> outside;    // unresolved points above this facet
  int furthest = -1;
  double furthest_dist = 0.0;
  bool alive = true;

  double dist(const Eigen::VectorXd& p) const { return normal.dot(p) - offset; }
};

// Unit normal of the hyperplane through r affinely independent points
// (rows of `pts` indexed by verts), via the SVD nullspace of the edge matrix.
Eigen::VectorXd hyperplane_normal(const std::vector<Eigen::VectorXd>& pts,
                                  const std::vector<int>& verts) {
  const int r = static_cast<int>(verts.size());
  Eigen::MatrixXd edges(r - 1, r);
  for (int i = 1; i < r; ++i) edges.row(i - 1) = (pts[verts[i]] - pts[verts[0]]).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(edges, Eigen::ComputeFullV);
  return svd.matrixV().col(r - 1);
}

// Builds a facet over `verts`, oriented away from the interior point.
Facet make_facet(const std::vector<Eigen::VectorXd>& pts, std::vector<int> verts,
                 const Eigen::VectorXd& interior) {
  Facet f;
  f.verts = std::move(verts);
  f.normal = hyperplane_normal(pts, f.verts);
  f.offset = f.normal.dot(pts[f.verts[0]]);
  if (f.normal.dot(interior) > f.offset) {
    f.normal = -f.normal;
    f.offset = -f.offset;
  }
  f.neighbors.assign(f.verts.size(), -1);
  return f;
}

// Quickhull over an r-dimensional cloud (r >= 2), returning alive facets.
std::vector<Facet> quickhull(const std::vector<Eigen::VectorXd>& pts, int r) {
  const int m = static_cast<int>(pts.size());

  // Initial simplex: start from the extreme pair along the axis of largest
  // spread, then greedily add the point with largest residual w.r.t. the
  // current affine flat (Gram-Schmidt on the flat's direction basis).
  std::vector<int> simplex;
  {
    int best_axis = 0, lo = 0, hi = 0;
    double best_spread = -1.0;
    for (int a = 0; a < r; ++a) {
      int lo_a = 0, hi_a = 0;
      for (int j = 1; j < m; ++j) {
        if (pts[j](a) < pts[lo_a](a)) lo_a = j;
        if (pts[j](a) > pts[hi_a](a)) hi_a = j;
      }
      double spread = pts[hi_a](a) - pts[lo_a](a);
      if (spread > best_spread) {
        best_spread = spread;
        best_axis = a;
        lo = lo_a;
        hi = hi_a;
      }
    }
    (void)best_axis;
    simplex = {lo, hi};
    std::vector<Eigen::VectorXd> basis;  // orthonormal directions of the flat
    basis.push_back((pts[hi] - pts[lo]).normalized());
    while (static_cast<int>(simplex.size()) < r + 1) {
      int best = -1;
      double best_res = 0.0;
      for (int j = 0; j < m; ++j) {
        Eigen::VectorXd v = pts[j] - pts[simplex[0]];
        for (const auto& b : basis) v -= b.dot(v) * b;
        double res = v.norm();
        if (res > best_res) {
          best_res = res;
          best = j;
        }
      }
      if (best < 0 || best_res <= kHullTol) {
        throw std::runtime_error("convex_hull: rank collapse during simplex construction");
      }
      Eigen::VectorXd v = pts[best] - pts[simplex[0]];
      for (const auto& b : basis) v -= b.dot(v) * b;
      basis.push_back(v.normalized());
      simplex.push_back(best);
    }
  }

  Eigen::VectorXd interior = Eigen::VectorXd::Zero(r);
  for (int id : simplex) interior += pts[id];
  interior /= static_cast<double>(simplex.size());

  std::vector<Facet> facets;
  facets.reserve(64);
  for (int skip = 0; skip <= r; ++skip) {
    std::vector<int> verts;
    for (int i = 0; i <= r; ++i) {
      if (i != skip) verts.push_back(simplex[i]);
    }
    facets.push_back(make_facet(pts, std::move(verts), interior));
  }
  // Simplex facet adjacency: facet `skip` meets facet `other` across the
  // ridge omitting both skipped vertices.
  for (int a = 0; a <= r; ++a) {
    for (int b = 0; b <= r; ++b) {
      if (a == b) continue;
      // In facet a, the slot holding simplex[b] is opposite the ridge shared
      // with... careful: facet a omits simplex[a]; ridge shared with facet b
      // omits simplex[a] and simplex[b]; within facet a it is opposite the
      // vertex simplex[b].
      auto& fa = facets[a];
      for (size_t s = 0; s < fa.verts.size(); ++s) {
        if (fa.verts[s] == simplex[b]) fa.neighbors[s] = b;
      }
    }
  }

  // Assign points to outside sets.
  auto assign_point = [&](int j, const std::vector<int>& candidate_facets) {
    for (int fi : candidate_facets) {
      Facet& f = facets[fi];
      if (!f.alive) continue;
      double d = f.dist(pts[j]);
      if (d > kHullTol) {
        f.outside.push_back(j);
        if (d > f.furthest_dist) {
          f.furthest_dist = d;
          f.furthest = j;
        }
        return;
      }
    }
  };
  {
    std::vector<int> all(facets.size());
    for (size_t i = 0; i < facets.size(); ++i) all[i] = static_cast<int>(i);
    std::vector<bool> in_simplex(m, false);
    for (int id : simplex) in_simplex[id] = true;
    for (int j = 0; j < m; ++j) {
      if (!in_simplex[j]) assign_point(j, all);
    }
  }

  std::deque<int> pending;
  for (size_t i = 0; i < facets.size(); ++i) {
    if (!facets[i].outside.empty()) pending.push_back(static_cast<int>(i));
  }

  while (!pending.empty()) {
    int fi = pending.front();
    pending.pop_front();
    if (!facets[fi].alive || facets[fi].outside.empty()) continue;
    const int apex = facets[fi].furthest;
    const Eigen::VectorXd& p = pts[apex];

    // Visible set via breadth-first search across facet adjacency.
    std::vector<int> visible;
    std::vector<char> seen(facets.size(), 0);
    std::deque<int> queue = {fi};
    seen[fi] = 1;
    // (new_facet_vertices_ridge, hidden neighbor facet, slot in hidden facet)
    struct Horizon {
      std::vector<int> ridge;
      int hidden;
      int hidden_slot;
    };
    std::vector<Horizon> horizon;
    while (!queue.empty()) {
      int gi = queue.front();
      queue.pop_front();
      visible.push_back(gi);
      Facet& g = facets[gi];
      for (size_t s = 0; s < g.neighbors.size(); ++s) {
        int hi = g.neighbors[s];
        if (hi < 0) throw std::runtime_error("convex_hull: broken facet adjacency");
        if (facets[hi].dist(p) > kHullTol) {
          if (!seen[hi]) {
            seen[hi] = 1;
            queue.push_back(hi);
          }
        } else {
          // Ridge between visible g and hidden hi: g.verts minus slot s.
          Horizon h;
          h.ridge.reserve(g.verts.size() - 1);
          for (size_t t = 0; t < g.verts.size(); ++t) {
            if (t != s) h.ridge.push_back(g.verts[t]);
          }
          h.hidden = hi;
          // Find the slot in the hidden facet pointing back at g.
          h.hidden_slot = -1;
          for (size_t t = 0; t < facets[hi].neighbors.size(); ++t) {
            if (facets[hi].neighbors[t] == gi) h.hidden_slot = static_cast<int>(t);
          }
          if (h.hidden_slot < 0) throw std::runtime_error("convex_hull: asymmetric adjacency");
          horizon.push_back(std::move(h));
        }
      }
    }

    // Build the cone of new facets from the apex over each horizon ridge.
    std::vector<int> new_ids;
    new_ids.reserve(horizon.size());
    // Ridges of new facets that contain the apex, keyed by their sorted
    // non-apex vertices; each is shared by exactly two new facets.
    std::map<std::vector<int>, std::pair<int, int>> cone_ridges;
    for (const Horizon& h : horizon) {
      std::vector<int> verts = h.ridge;
      verts.push_back(apex);
      Facet nf = make_facet(pts, std::move(verts), interior);
      int nid = static_cast<int>(facets.size());
      // Link across the horizon ridge (slot opposite the apex).
      for (size_t s = 0; s < nf.verts.size(); ++s) {
        if (nf.verts[s] == apex) nf.neighbors[s] = h.hidden;
      }
      facets.push_back(std::move(nf));
      facets[h.hidden].neighbors[h.hidden_slot] = nid;
      new_ids.push_back(nid);

      // Register the apex-containing ridges for cone-internal adjacency.
      Facet& back = facets[nid];
      for (size_t s = 0; s < back.verts.size(); ++s) {
        if (back.verts[s] == apex) continue;
        std::vector<int> key;
        key.reserve(back.verts.size() - 1);
        for (size_t t = 0; t < back.verts.size(); ++t) {
          if (t != s) key.push_back(back.verts[t]);
        }
        std::sort(key.begin(), key.end());
        auto it = cone_ridges.find(key);
        if (it == cone_ridges.end()) {
          cone_ridges.emplace(std::move(key), std::make_pair(nid, static_cast<int>(s)));
        } else {
          facets[nid].neighbors[s] = it->second.first;
          facets[it->second.first].neighbors[it->second.second] = nid;
        }
      }
    }

    // Reassign orphaned outside points, mark visible facets dead.
    for (int gi : visible) facets[gi].alive = false;
    for (int gi : visible) {
      for (int j : facets[gi].outside) {
        if (j != apex) assign_point(j, new_ids);
      }
      facets[gi].outside.clear();
    }
    for (int nid : new_ids) {
      if (!facets[nid].outside.empty()) pending.push_back(nid);
    }
  }

  std::vector<Facet> alive;
  for (auto& f : facets) {
    if (f.alive) alive.push_back(std::move(f));
  }
  return alive;
}

}  // namespace

Eigen::VectorXd ConvexHullSet::to_span(const Eigen::VectorXd& x) const {
  if (full_rank()) return x;
  return span_basis.transpose() * (x - span_origin);
}

double ConvexHullSet::span_residual(const Eigen::VectorXd& x) const {
  if (full_rank()) return 0.0;
  const Eigen::VectorXd d = x - span_origin;
  if (degenerate_rank == 0) return d.norm();
  return (d - span_basis * (span_basis.transpose() * d)).norm();
}

ConvexHullSet convex_hull(const Eigen::MatrixXd& points) {
  std::vector<Eigen::VectorXd> pts(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) pts[static_cast<size_t>(i)] = points.row(i);
  return convex_hull(pts);
}

ConvexHullSet convex_hull(const std::vector<Eigen::VectorXd>& points) {
  if (points.empty()) throw std::invalid_argument("convex_hull: no points");
  const int n = static_cast<int>(points[0].size());
  if (n < 1) throw std::invalid_argument("convex_hull: dimension must be >= 1");
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != n) {
      throw std::invalid_argument("convex_hull: mixed dimensions");
    }
  }
  const int m = static_cast<int>(points.size());

  ConvexHullSet hull;
  hull.dimension = n;

  // Affine rank of the cloud: SVD directions whose point spread exceeds the
  // facet tolerance.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(m);
  Eigen::MatrixXd centered(m, n);
  for (int i = 0; i < m; ++i) centered.row(i) = (points[i] - mean).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  int rank = 0;
  {
    const Eigen::VectorXd& sv = svd.singularValues();
    for (int i = 0; i < sv.size(); ++i) {
      if (sv(i) <= kHullTol) continue;
      const double spread = (centered * svd.matrixV().col(i)).cwiseAbs().maxCoeff();
      if (spread > kHullTol) ++rank;
    }
  }
  hull.degenerate_rank = rank;

  // Span chart and span-coordinate cloud.
  std::vector<Eigen::VectorXd> span_pts(m);
  if (rank == n) {
    hull.span_origin = Eigen::VectorXd::Zero(n);
    hull.span_basis = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < m; ++i) span_pts[i] = points[i];
  } else {
    hull.span_origin = mean;
    hull.span_basis = svd.matrixV().leftCols(rank);
    for (int i = 0; i < m; ++i) {
      span_pts[i] = hull.span_basis.transpose() * (points[i] - mean);
    }
  }

  if (rank == 0) {
    hull.vertices = {points[0]};
    hull.vertex_ids = {0};
    return hull;
  }

  if (rank == 1) {
    int lo = 0, hi = 0;
    for (int j = 1; j < m; ++j) {
      if (span_pts[j](0) < span_pts[lo](0)) lo = j;
      if (span_pts[j](0) > span_pts[hi](0)) hi = j;
    }
    hull.vertex_ids = {lo, hi};
    hull.vertices = {points[lo], points[hi]};
    HullFacet fhi{{hi}, Eigen::VectorXd::Ones(1), span_pts[hi](0)};
    HullFacet flo{{lo}, -Eigen::VectorXd::Ones(1), -span_pts[lo](0)};
    hull.facets = {fhi, flo};
    return hull;
  }

  std::vector<Facet> alive = quickhull(span_pts, rank);

  std::vector<char> is_vertex(m, 0);
  hull.facets.reserve(alive.size());
  for (const Facet& f : alive) {
    HullFacet hf;
    hf.vertex_ids = f.verts;
    hf.normal = f.normal;
    hf.offset = f.offset;
    hull.facets.push_back(std::move(hf));
    for (int v : f.verts) is_vertex[v] = 1;
  }
  for (int j = 0; j < m; ++j) {
    if (is_vertex[j]) {
      hull.vertex_ids.push_back(j);
      hull.vertices.push_back(points[j]);
    }
  }
  return hull;
}

bool hull_contains(const ConvexHullSet& hull, const Eigen::VectorXd& x, double tol) {
  if (static_cast<int>(x.size()) != hull.dimension) {
    throw std::invalid_argument("hull_contains: dimension mismatch");
  }
  if (!hull.full_rank() && hull.span_residual(x) > tol) return false;
  if (hull.degenerate_rank == 0) return true;  // residual check covers it
  const Eigen::VectorXd y = hull.to_span(x);
  for (const auto& f : hull.facets) {
    if (f.normal.dot(y) - f.offset > tol) return false;
  }
  return true;
}

AxisAlignedBox hull_bounding_box(const ConvexHullSet& hull) {
  if (hull.vertices.empty()) throw std::invalid_argument("hull_bounding_box: empty hull");
  Eigen::VectorXd lo = hull.vertices[0];
  Eigen::VectorXd hi = hull.vertices[0];
  for (const auto& v : hull.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return AxisAlignedBox(lo, hi);
}

double hull_volume(const ConvexHullSet& hull) {
  if (!hull.full_rank()) {
    throw std::invalid_argument("hull_volume: zero volume / degenerate hull");
  }
  const int n = hull.dimension;
  if (n > 4) {
    return hull_volume_mc(hull, 200000, 0x9e3779b9ULL).value;
  }
  if (n == 1) {
    double lo = 0.0, hi = 0.0;
    for (const auto& f : hull.facets) (f.normal(0) > 0 ? hi : lo) = f.normal(0) * f.offset;
    return hi - lo;
  }
  // Star decomposition from the vertex centroid: facets are simplices, so
  // each contributes |det[v_i - c]| / n!.
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (const auto& v : hull.vertices) c += v;
  c /= static_cast<double>(hull.vertices.size());
  double factorial = 1.0;
  for (int i = 2; i <= n; ++i) factorial *= i;

  // Map input ids to vertex coordinates.
  std::map<int, const Eigen::VectorXd*> by_id;
  for (size_t i = 0; i < hull.vertex_ids.size(); ++i) {
    by_id[hull.vertex_ids[i]] = &hull.vertices[i];
  }
  double vol = 0.0;
  Eigen::MatrixXd w(n, n);
  for (const auto& f : hull.facets) {
    for (int i = 0; i < n; ++i) w.col(i) = *by_id.at(f.vertex_ids[i]) - c;
    vol += std::abs(w.determinant());
  }
  return vol / factorial;
}

VolumeEstimate hull_volume_mc(const ConvexHullSet& hull, std::int64_t samples, std::uint64_t seed) {
  if (!hull.full_rank()) {
    throw std::invalid_argument("hull_volume: zero volume / degenerate hull");
  }
  const AxisAlignedBox box = hull_bounding_box(hull);
  Rng rng(Rng::scramble(seed));
  std::int64_t inside = 0;
  Eigen::VectorXd x(hull.dimension);
  for (std::int64_t s = 0; s < samples; ++s) {
    for (int i = 0; i < hull.dimension; ++i) x(i) = rng.uniform(box.lower(i), box.upper(i));
    if (hull_contains(hull, x)) ++inside;
  }
  const double p = static_cast<double>(inside) / static_cast<double>(samples);
  const double bv = box.volume();
  VolumeEstimate est;
  est.value = p * bv;
  est.std_error = bv * std::sqrt(std::max(0.0, p * (1.0 - p) / static_cast<double>(samples)));
  return est;
}

}  // namespace reachkit::geometry
