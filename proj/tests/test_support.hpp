#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <vector>

#include "reachkit/dynamics/model.hpp"
#include "reachkit/rng.hpp"

namespace test_support {

/// Central finite differences of a scalar function.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Central finite differences of a vector function; column j = df/dx_j.
inline Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double h = 1e-5) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

inline double rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max({1e-8, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline double rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max({1e-8, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// Flattens a tuple into one vector (x0, u_0.., theta, w_0..), the layout
/// ParamGradient::flatten uses.
inline Eigen::VectorXd flatten_tuple(const reachkit::dynamics::ParamTuple& z) {
  Eigen::Index total = z.x0.size() + z.theta.size();
  for (const auto& u : z.controls) total += u.size();
  for (const auto& w : z.disturbances) total += w.size();
  Eigen::VectorXd v(total);
  Eigen::Index at = 0;
  v.segment(at, z.x0.size()) = z.x0;
  at += z.x0.size();
  for (const auto& u : z.controls) {
    v.segment(at, u.size()) = u;
    at += u.size();
  }
  v.segment(at, z.theta.size()) = z.theta;
  at += z.theta.size();
  for (const auto& w : z.disturbances) {
    v.segment(at, w.size()) = w;
    at += w.size();
  }
  return v;
}

inline reachkit::dynamics::ParamTuple unflatten_tuple(const Eigen::VectorXd& v,
                                                      const reachkit::dynamics::ParamTuple& like) {
  reachkit::dynamics::ParamTuple z = like;
  Eigen::Index at = 0;
  z.x0 = v.segment(at, like.x0.size());
  at += like.x0.size();
  for (size_t k = 0; k < like.controls.size(); ++k) {
    z.controls[k] = v.segment(at, like.controls[k].size());
    at += like.controls[k].size();
  }
  z.theta = v.segment(at, like.theta.size());
  at += like.theta.size();
  for (size_t k = 0; k < like.disturbances.size(); ++k) {
    z.disturbances[k] = v.segment(at, like.disturbances[k].size());
    at += like.disturbances[k].size();
  }
  return z;
}

/// Independent 2D convex hull (Andrew monotone chain), returning the extreme
/// points in counter-clockwise order. Used as an oracle against quickhull.
inline std::vector<Eigen::Vector2d> monotone_chain(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                          return a == b;
                        }),
            pts.end());
  const auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a,
                        const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  if (pts.size() < 3) return pts;
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  const size_t lower = k + 1;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace test_support
