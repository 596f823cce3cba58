#include "reachkit/lipschitz/lipschitz.hpp"

#include <cmath>
#include <stdexcept>

namespace reachkit::lipschitz {

geometry::Ellipsoid lipschitz_step(const LipschitzModelInfo& info, const geometry::Ellipsoid& e) {
  const int n = info.dim();
  if (e.dim() != n) throw std::invalid_argument("lipschitz_step: dimension mismatch");

  const Eigen::VectorXd next_center =
      info.affine_map * e.center + info.affine_offset + info.residual(e.center);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.shape);
  if (es.info() != Eigen::Success) throw std::runtime_error("lipschitz_step: eigensolver failed");
  const double lambda_max = std::max(0.0, es.eigenvalues().maxCoeff());
  const double radius = info.paper_literal ? lambda_max : std::sqrt(lambda_max);

  const Eigen::MatrixXd q_nom = info.affine_map * e.shape * info.affine_map.transpose();
  const Eigen::VectorXd dev = info.lipschitz_constants * radius;
  const Eigen::MatrixXd q_res =
      (static_cast<double>(n) * dev.array().square()).matrix().asDiagonal();

  geometry::Ellipsoid sum = geometry::minkowski_outer(
      geometry::Ellipsoid(Eigen::VectorXd::Zero(n), q_nom),
      geometry::Ellipsoid(Eigen::VectorXd::Zero(n), q_res));
  return geometry::Ellipsoid(next_center, sum.shape);
}

std::vector<geometry::Ellipsoid> lipschitz_propagate(const std::vector<LipschitzModelInfo>& infos,
                                                     const geometry::Ellipsoid& e0) {
  std::vector<geometry::Ellipsoid> tube;
  tube.reserve(infos.size() + 1);
  tube.push_back(e0);
  for (size_t k = 0; k < infos.size(); ++k) {
    geometry::Ellipsoid next = lipschitz_step(infos[k], tube.back());
    if (!next.shape.allFinite() || !next.center.allFinite()) {
      throw std::runtime_error("lipschitz_propagate: overflow at step " + std::to_string(k + 1));
    }
    tube.push_back(std::move(next));
  }
  return tube;
}

std::vector<geometry::Ellipsoid> lipschitz_propagate(const LipschitzModelInfo& info,
                                                     const geometry::Ellipsoid& e0, int horizon) {
  return lipschitz_propagate(std::vector<LipschitzModelInfo>(static_cast<size_t>(horizon), info),
                             e0);
}

}  // namespace reachkit::lipschitz
