#include "reachkit/geometry/ellipsoid.hpp"

#include <cmath>
#include <stdexcept>

namespace reachkit::geometry {

namespace {

constexpr double kSymTol = 1e-12;  // relative symmetry tolerance
constexpr double kEigTol = 1e-12;  // eigenvalues below scale*this count as zero

void check_shape(const Eigen::MatrixXd& q) {
  if (q.rows() != q.cols()) throw std::invalid_argument("Ellipsoid: shape not square");
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if (((q - q.transpose()).cwiseAbs().maxCoeff()) > kSymTol * scale) {
    throw std::invalid_argument("Ellipsoid: shape not symmetric");
  }
}

}  // namespace

Ellipsoid::Ellipsoid(Eigen::VectorXd mu, Eigen::MatrixXd q)
    : center(std::move(mu)), shape(std::move(q)) {
  if (center.size() != shape.rows()) throw std::invalid_argument("Ellipsoid: dimension mismatch");
  check_shape(shape);
  shape = 0.5 * (shape + shape.transpose().eval());  // enforce exact symmetry
}

Ellipsoid Ellipsoid::unit_ball(int dim) {
  return Ellipsoid(Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim));
}

Ellipsoid Ellipsoid::point(const Eigen::VectorXd& mu) {
  return Ellipsoid(mu, Eigen::MatrixXd::Zero(mu.size(), mu.size()));
}

bool Ellipsoid::contains(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != center.size()) throw std::invalid_argument("Ellipsoid contains: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shape);
  if (es.info() != Eigen::Success) throw std::runtime_error("Ellipsoid: eigendecomposition failed");
  const Eigen::VectorXd d = es.eigenvalues();
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  const Eigen::VectorXd y = es.eigenvectors().transpose() * (x - center);
  double m = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    if (d(i) <= kEigTol * scale) {
      // Degenerate direction: only the center is admitted.
      if (std::abs(y(i)) > tol) return false;
    } else {
      m += y(i) * y(i) / d(i);
    }
  }
  return m <= 1.0 + tol;
}

double Ellipsoid::mahalanobis_sq(const Eigen::VectorXd& x) const {
  Eigen::LLT<Eigen::MatrixXd> llt(shape);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("Ellipsoid: shape not positive definite");
  const Eigen::VectorXd y = x - center;
  return y.dot(llt.solve(y));
}

double ellipsoid_volume(const Ellipsoid& e) {
  const int n = e.dim();
  Eigen::LLT<Eigen::MatrixXd> llt(e.shape);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("ellipsoid_volume: singular shape matrix");
  }
  // sqrt(det Q) = prod of Cholesky diagonal entries
  double sqrt_det = 1.0;
  for (int i = 0; i < n; ++i) sqrt_det *= llt.matrixLLT()(i, i);
  if (!(sqrt_det > 0.0)) throw std::invalid_argument("ellipsoid_volume: singular shape matrix");
  const double unit = std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
  return unit * sqrt_det;
}

Ellipsoid box_to_ellipsoid(const AxisAlignedBox& box, int s) {
  if (s < 1 || s > box.dim()) throw std::invalid_argument("box_to_ellipsoid: invalid dimension count");
  Eigen::VectorXd delta = box.half_widths().head(s).cwiseMax(1e-12);
  Eigen::MatrixXd q = (static_cast<double>(s) * delta.array().square()).matrix().asDiagonal();
  return Ellipsoid(box.center().head(s), q);
}

Ellipsoid minkowski_outer(const Ellipsoid& e1, const Ellipsoid& e2) {
  if (e1.dim() != e2.dim()) throw std::invalid_argument("minkowski_outer: dimension mismatch");
  const double t1 = e1.shape.trace();
  const double t2 = e2.shape.trace();
  if (t2 <= 0.0 && t1 <= 0.0) return Ellipsoid::point(Eigen::VectorXd::Zero(e1.dim()));
  if (t2 <= 0.0) return Ellipsoid(Eigen::VectorXd::Zero(e1.dim()), e1.shape);
  if (t1 <= 0.0) return Ellipsoid(Eigen::VectorXd::Zero(e1.dim()), e2.shape);
  const double c = std::sqrt(t1 / t2);
  Eigen::MatrixXd q = (1.0 + 1.0 / c) * e1.shape + (1.0 + c) * e2.shape;
  return Ellipsoid(Eigen::VectorXd::Zero(e1.dim()), q);
}

Eigen::VectorXd project_ellipsoid(const Eigen::VectorXd& z, const Ellipsoid& e) {
  if (z.size() != e.center.size()) throw std::invalid_argument("project_ellipsoid: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.shape);
  if (es.info() != Eigen::Success) throw std::runtime_error("project_ellipsoid: eigendecomposition failed");
  const Eigen::VectorXd d = es.eigenvalues();
  if (d.minCoeff() <= 0.0) throw std::invalid_argument("project_ellipsoid: singular shape matrix");

  const Eigen::VectorXd u = es.eigenvectors().transpose() * (z - e.center);
  // Inside (or on) the set: z is its own projection.
  double m = (u.array().square() / d.array()).sum();
  if (m <= 1.0) return z;

  // KKT: x = mu + V diag(d_i / (d_i + nu)) u with nu >= 0 solving
  // g(nu) = sum d_i u_i^2 / (d_i + nu)^2 - 1 = 0. g is strictly decreasing.
  auto g = [&](double nu) {
    return (d.array() * u.array().square() / (d.array() + nu).square()).sum() - 1.0;
  };
  auto dg = [&](double nu) {
    return -2.0 * (d.array() * u.array().square() / (d.array() + nu).cube()).sum();
  };

  double lo = 0.0;
  double hi = std::sqrt(d.maxCoeff()) * u.norm();  // g(hi) <= 0 bound
  while (g(hi) > 0.0) hi *= 2.0;

  double nu = 0.5 * hi;
  for (int it = 0; it < 100; ++it) {
    double val = g(nu);
    if (std::abs(val) < 1e-12) break;
    (val > 0.0 ? lo : hi) = nu;
    double step = nu - val / dg(nu);
    nu = (step > lo && step < hi) ? step : 0.5 * (lo + hi);
  }
  const Eigen::VectorXd y = (d.array() / (d.array() + nu) * u.array()).matrix();
  return e.center + es.eigenvectors() * y;
}

}  // namespace reachkit::geometry
