#include "reachkit/geometry/box.hpp"

#include <stdexcept>

namespace reachkit::geometry {

AxisAlignedBox::AxisAlignedBox(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) {
    throw std::invalid_argument("AxisAlignedBox: dimension mismatch");
  }
  if (lower.size() < 1) {
    throw std::invalid_argument("AxisAlignedBox: dimension must be >= 1");
  }
  if ((lower.array() > upper.array()).any()) {
    throw std::invalid_argument("AxisAlignedBox: lower > upper");
  }
}

AxisAlignedBox AxisAlignedBox::centered(const Eigen::VectorXd& center,
                                        const Eigen::VectorXd& half_widths) {
  return AxisAlignedBox(center - half_widths, center + half_widths);
}

AxisAlignedBox AxisAlignedBox::symmetric(int dim, double r) {
  return AxisAlignedBox(Eigen::VectorXd::Constant(dim, -r), Eigen::VectorXd::Constant(dim, r));
}

AxisAlignedBox AxisAlignedBox::singleton(const Eigen::VectorXd& p) {
  return AxisAlignedBox(p, p);
}

double AxisAlignedBox::volume() const { return (upper - lower).prod(); }

bool AxisAlignedBox::contains(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != lower.size()) throw std::invalid_argument("box contains: dimension mismatch");
  return (x.array() >= lower.array() - tol).all() && (x.array() <= upper.array() + tol).all();
}

AxisAlignedBox AxisAlignedBox::head(int s) const {
  if (s < 1 || s > dim()) throw std::invalid_argument("box head: invalid size");
  return AxisAlignedBox(lower.head(s), upper.head(s));
}

Eigen::VectorXd project_box(const Eigen::VectorXd& z, const AxisAlignedBox& box) {
  if (z.size() != box.lower.size()) throw std::invalid_argument("project_box: dimension mismatch");
  return z.cwiseMax(box.lower).cwiseMin(box.upper);
}

AxisAlignedBox outer_box(const Eigen::MatrixXd& points, const Eigen::VectorXd& center) {
  if (points.rows() < 1) throw std::invalid_argument("outer_box: no points");
  if (points.cols() != center.size()) throw std::invalid_argument("outer_box: dimension mismatch");
  Eigen::VectorXd delta =
      (points.rowwise() - center.transpose()).cwiseAbs().colwise().maxCoeff().transpose();
  return AxisAlignedBox::centered(center, delta);
}

}  // namespace reachkit::geometry
