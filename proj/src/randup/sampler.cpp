#include <stdexcept>

#include "reachkit/randup/randup.hpp"
#include "reachkit/rng.hpp"

namespace reachkit::randup {

namespace {

// Substream tags, one per block of z.
enum BlockTag : std::uint64_t { kX0 = 0, kControl = 1, kTheta = 2, kDisturbance = 3 };

double draw01(Rng& rng, const BlockDistribution& dist) {
  switch (dist.kind) {
    case BlockDistribution::Kind::Uniform:
      return rng.uniform01();
    case BlockDistribution::Kind::Beta:
      return rng.beta(dist.alpha, dist.beta);
  }
  return rng.uniform01();
}

Eigen::VectorXd sample_box(Rng& rng, const geometry::AxisAlignedBox& box,
                           const BlockDistribution& dist) {
  Eigen::VectorXd x(box.dim());
  for (int i = 0; i < box.dim(); ++i) {
    x(i) = box.lower(i) + draw01(rng, dist) * (box.upper(i) - box.lower(i));
  }
  return x;
}

// Uniform in the ellipsoid: gaussian direction, radius u^{1/n}, mapped
// through a square root of the shape matrix.
Eigen::VectorXd sample_ellipsoid(Rng& rng, const geometry::Ellipsoid& e) {
  const int n = e.dim();
  Eigen::VectorXd dir(n);
  for (int i = 0; i < n; ++i) dir(i) = rng.normal();
  const double nrm = dir.norm();
  if (nrm > 0.0) dir /= nrm;
  const double radius = std::pow(rng.uniform01(), 1.0 / static_cast<double>(n));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.shape);
  const Eigen::MatrixXd sqrt_q = es.eigenvectors() *
                                 es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                                 es.eigenvectors().transpose();
  return e.center + sqrt_q * (radius * dir);
}

}  // namespace

int UncertaintySpec::x0_dim() const {
  return std::visit([](const auto& s) { return s.dim(); }, x0_set);
}

int UncertaintySpec::control_dim() const {
  return control_sets.empty() ? 0 : control_sets.front().dim();
}

std::vector<geometry::AxisAlignedBox> UncertaintySpec::replicate_controls(
    const geometry::AxisAlignedBox& box, int horizon) {
  return std::vector<geometry::AxisAlignedBox>(static_cast<size_t>(horizon), box);
}

std::vector<geometry::AxisAlignedBox> UncertaintySpec::singleton_controls(
    const std::vector<Eigen::VectorXd>& controls) {
  std::vector<geometry::AxisAlignedBox> sets;
  sets.reserve(controls.size());
  for (const auto& u : controls) sets.push_back(geometry::AxisAlignedBox::singleton(u));
  return sets;
}

dynamics::ParamTuple sample_one(const UncertaintySpec& spec, const SamplerConfig& cfg,
                                std::uint64_t particle_index) {
  dynamics::ParamTuple z;
  {
    Rng rng = Rng::substream(cfg.seed, particle_index, kX0);
    if (std::holds_alternative<geometry::AxisAlignedBox>(spec.x0_set)) {
      z.x0 = sample_box(rng, std::get<geometry::AxisAlignedBox>(spec.x0_set), cfg.x0_dist);
    } else {
      z.x0 = sample_ellipsoid(rng, std::get<geometry::Ellipsoid>(spec.x0_set));
    }
  }
  {
    Rng rng = Rng::substream(cfg.seed, particle_index, kControl);
    z.controls.reserve(spec.control_sets.size());
    for (const auto& box : spec.control_sets) {
      z.controls.push_back(sample_box(rng, box, cfg.control_dist));
    }
  }
  {
    Rng rng = Rng::substream(cfg.seed, particle_index, kTheta);
    z.theta = spec.theta_set ? sample_box(rng, *spec.theta_set, cfg.theta_dist)
                             : Eigen::VectorXd(0);
  }
  {
    Rng rng = Rng::substream(cfg.seed, particle_index, kDisturbance);
    z.disturbances.reserve(spec.horizon);
    for (int k = 0; k < spec.horizon; ++k) {
      z.disturbances.push_back(spec.disturbance_set
                                   ? sample_box(rng, *spec.disturbance_set, cfg.disturbance_dist)
                                   : Eigen::VectorXd(0));
    }
  }
  return z;
}

std::vector<dynamics::ParamTuple> sample_params(const UncertaintySpec& spec,
                                                const SamplerConfig& cfg) {
  if (cfg.particles < 1) throw std::invalid_argument("sample_params: M must be >= 1");
  if (static_cast<int>(spec.control_sets.size()) != spec.horizon) {
    throw std::invalid_argument("sample_params: control sets must match the horizon");
  }
  std::vector<dynamics::ParamTuple> tuples;
  tuples.reserve(cfg.particles);
  for (int j = 0; j < cfg.particles; ++j) {
    tuples.push_back(sample_one(spec, cfg, static_cast<std::uint64_t>(j)));
  }
  return tuples;
}

}  // namespace reachkit::randup
