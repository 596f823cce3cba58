#include "reachkit/dynamics/models.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace reachkit::dynamics {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

// Quaternion-rate matrix for scalar-last q: qdot = 0.5 * omega_matrix(w) * q.
Eigen::Matrix4d omega_matrix(const Eigen::Vector3d& w) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<3, 3>() = -skew(w);
  m.topRightCorner<3, 1>() = w;
  m.bottomLeftCorner<1, 3>() = -w.transpose();
  return m;
}

}  // namespace

// ---------------------------------------------------------------- additive

AdditiveLinear::AdditiveLinear(int n, double control_bound)
    : n_(n), control_bound_(control_bound) {
  if (n < 1) throw std::invalid_argument("AdditiveLinear: n must be >= 1");
}

Eigen::VectorXd AdditiveLinear::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& theta,
                                     const Eigen::VectorXd& w) const {
  check_inputs(x, u, theta, w);
  return x + u;
}

StepJacobians AdditiveLinear::jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                        const Eigen::VectorXd& theta,
                                        const Eigen::VectorXd& w) const {
  check_inputs(x, u, theta, w);
  StepJacobians j;
  j.a = Eigen::MatrixXd::Identity(n_, n_);
  j.b = Eigen::MatrixXd::Identity(n_, n_);
  j.c = Eigen::MatrixXd::Zero(n_, 0);
  j.d = Eigen::MatrixXd::Zero(n_, 0);
  return j;
}

// ------------------------------------------------------- double integrator

Eigen::MatrixXd DoubleIntegrator::state_matrix() {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 4);
  a(0, 2) = 1.0;
  a(1, 3) = 1.0;
  return a;
}

Eigen::MatrixXd DoubleIntegrator::control_matrix() {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 2);
  b(2, 0) = 1.0;
  b(3, 1) = 1.0;
  return b;
}

Eigen::VectorXd DoubleIntegrator::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                       const Eigen::VectorXd& theta,
                                       const Eigen::VectorXd& w) const {
  check_inputs(x, u, theta, w);
  Eigen::VectorXd next(4);
  next.head<2>() = x.head<2>() + x.tail<2>();
  next.tail<2>() = x.tail<2>() + u;
  return next;
}

StepJacobians DoubleIntegrator::jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                          const Eigen::VectorXd& theta,
                                          const Eigen::VectorXd& w) const {
  check_inputs(x, u, theta, w);
  StepJacobians j;
  j.a = state_matrix();
  j.b = control_matrix();
  j.c = Eigen::MatrixXd::Zero(4, 0);
  j.d = Eigen::MatrixXd::Zero(4, 0);
  return j;
}

// ---------------------------------------------------------------------- MLP

int MlpWeights::input_dim() const {
  if (layers.empty()) throw std::invalid_argument("MlpWeights: empty network");
  return static_cast<int>(layers.front().w.cols());
}

int MlpWeights::output_dim() const {
  if (layers.empty()) throw std::invalid_argument("MlpWeights: empty network");
  return static_cast<int>(layers.back().w.rows());
}

void MlpWeights::validate() const {
  if (layers.empty()) throw std::invalid_argument("MlpWeights: empty network");
  for (size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].w.rows() != layers[i].b.size()) {
      throw std::invalid_argument("MlpWeights: bias size mismatch in layer " + std::to_string(i));
    }
    if (i > 0 && layers[i].w.cols() != layers[i - 1].w.rows()) {
      throw std::invalid_argument("MlpWeights: layer shapes do not chain at layer " +
                                  std::to_string(i));
    }
  }
}

Eigen::VectorXd MlpWeights::forward(const Eigen::VectorXd& in) const {
  Eigen::VectorXd a = in;
  for (size_t i = 0; i < layers.size(); ++i) {
    a = (layers[i].w * a + layers[i].b).eval();
    if (i + 1 < layers.size()) a = a.array().tanh().matrix();
  }
  return a;
}

Eigen::MatrixXd MlpWeights::jacobian(const Eigen::VectorXd& in) const {
  Eigen::VectorXd a = in;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(in.size(), in.size());
  for (size_t i = 0; i < layers.size(); ++i) {
    jac = (layers[i].w * jac).eval();
    a = (layers[i].w * a + layers[i].b).eval();
    if (i + 1 < layers.size()) {
      a = a.array().tanh().matrix();
      jac = ((1.0 - a.array().square()).matrix().asDiagonal() * jac).eval();
    }
  }
  return jac;
}

nlohmann::json MlpWeights::to_json() const {
  nlohmann::json j;
  j["activation"] = "tanh";
  j["layers"] = nlohmann::json::array();
  for (const auto& layer : layers) {
    nlohmann::json jl;
    auto w = nlohmann::json::array();
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
      auto row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) row.push_back(layer.w(r, c));
      w.push_back(std::move(row));
    }
    jl["W"] = std::move(w);
    auto b = nlohmann::json::array();
    for (Eigen::Index r = 0; r < layer.b.size(); ++r) b.push_back(layer.b(r));
    jl["b"] = std::move(b);
    j["layers"].push_back(std::move(jl));
  }
  return j;
}

MlpWeights MlpWeights::from_json(const nlohmann::json& j) {
  if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].empty()) {
    throw std::invalid_argument("MlpWeights: missing layers");
  }
  if (j.value("activation", "tanh") != std::string("tanh")) {
    throw std::invalid_argument("MlpWeights: unsupported activation");
  }
  MlpWeights net;
  for (const auto& jl : j["layers"]) {
    Layer layer;
    const auto& w = jl.at("W");
    const auto rows = w.size();
    if (rows == 0) throw std::invalid_argument("MlpWeights: empty weight matrix");
    const auto cols = w[0].size();
    layer.w.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < rows; ++r) {
      if (w[r].size() != cols) throw std::invalid_argument("MlpWeights: ragged weight matrix");
      for (size_t c = 0; c < cols; ++c) layer.w(r, c) = w[r][c].get<double>();
    }
    const auto& b = jl.at("b");
    layer.b.resize(static_cast<Eigen::Index>(b.size()));
    for (size_t r = 0; r < b.size(); ++r) layer.b(r) = b[r].get<double>();
    net.layers.push_back(std::move(layer));
  }
  net.validate();
  return net;
}

MlpWeights MlpWeights::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("MlpWeights: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

void MlpWeights::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("MlpWeights: cannot write " + path);
  out << to_json().dump(2) << "\n";
}

MlpWeights MlpWeights::zeros(const std::vector<int>& widths) {
  if (widths.size() < 2) throw std::invalid_argument("MlpWeights: need at least one layer");
  MlpWeights net;
  for (size_t i = 1; i < widths.size(); ++i) {
    Layer layer;
    layer.w = Eigen::MatrixXd::Zero(widths[i], widths[i - 1]);
    layer.b = Eigen::VectorXd::Zero(widths[i]);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

MlpResidual::MlpResidual(MlpWeights net, int state_dim, int control_dim)
    : net_(std::move(net)), n_(state_dim), m_(control_dim) {
  net_.validate();
  if (net_.input_dim() != n_ + m_ || net_.output_dim() != n_) {
    throw std::invalid_argument("MlpResidual: network dimensions do not match (n + m -> n)");
  }
}

Eigen::VectorXd MlpResidual::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const {
  check_inputs(x, u, theta, w);
  Eigen::VectorXd in(n_ + m_);
  in << x, u;
  return x + net_.forward(in);
}

StepJacobians MlpResidual::jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& theta,
                                     const Eigen::VectorXd& w) const {
  check_inputs(x, u, theta, w);
  Eigen::VectorXd in(n_ + m_);
  in << x, u;
  const Eigen::MatrixXd jac = net_.jacobian(in);
  StepJacobians j;
  j.a = Eigen::MatrixXd::Identity(n_, n_) + jac.leftCols(n_);
  j.b = jac.rightCols(m_);
  j.c = Eigen::MatrixXd::Zero(n_, 0);
  j.d = Eigen::MatrixXd::Zero(n_, 0);
  return j;
}

// --------------------------------------------------------------- spacecraft

Eigen::VectorXd Spacecraft13::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const {
  check_inputs(x, u, theta, w);
  const Eigen::Vector3d v = x.segment<3>(3);
  const Eigen::Vector4d q = x.segment<4>(6);
  const Eigen::Vector3d omega = x.segment<3>(10);
  const Eigen::Vector3d force = u.head<3>();
  const Eigen::Vector3d torque = u.tail<3>();
  const double m = theta(0);
  const Eigen::Vector3d j_diag = theta.tail<3>();

  Eigen::VectorXd next(13);
  next.segment<3>(0) = x.segment<3>(0) + dt_ * v;
  next.segment<3>(3) = v + (dt_ / m) * force;
  next.segment<4>(6) = q + (dt_ / 2.0) * (omega_matrix(omega) * q);
  const Eigen::Vector3d j_omega = j_diag.cwiseProduct(omega);
  const Eigen::Vector3d omega_dot = (torque - omega.cross(j_omega)).cwiseQuotient(j_diag);
  next.segment<3>(10) = omega + dt_ * omega_dot;
  return next + w;
}

StepJacobians Spacecraft13::jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                      const Eigen::VectorXd& theta,
                                      const Eigen::VectorXd& w) const {
  check_inputs(x, u, theta, w);
  const Eigen::Vector4d q = x.segment<4>(6);
  const Eigen::Vector3d qv = q.head<3>();
  const double qw = q(3);
  const Eigen::Vector3d omega = x.segment<3>(10);
  const Eigen::Vector3d force = u.head<3>();
  const Eigen::Vector3d torque = u.tail<3>();
  const double m = theta(0);
  const Eigen::Vector3d j_diag = theta.tail<3>();
  const double jx = j_diag(0), jy = j_diag(1), jz = j_diag(2);
  const double wx = omega(0), wy = omega(1), wz = omega(2);

  StepJacobians jac;
  jac.a = Eigen::MatrixXd::Identity(13, 13);
  jac.a.block<3, 3>(0, 3) = dt_ * Eigen::Matrix3d::Identity();
  jac.a.block<4, 4>(6, 6) += (dt_ / 2.0) * omega_matrix(omega);
  // d qdot / d omega = 0.5 * [ [qv]x + qw I ; -qv^T ]
  Eigen::MatrixXd xi(4, 3);
  xi.topRows<3>() = skew(qv) + qw * Eigen::Matrix3d::Identity();
  xi.bottomRows<1>() = -qv.transpose();
  jac.a.block<4, 3>(6, 10) = (dt_ / 2.0) * xi;
  // Euler torque term: omega_dot_x = (Mx - wy wz (Jz - Jy)) / Jx, etc.
  Eigen::Matrix3d dwdot_domega;
  dwdot_domega << 0, -wz * (jz - jy) / jx, -wy * (jz - jy) / jx,  //
      -wz * (jx - jz) / jy, 0, -wx * (jx - jz) / jy,              //
      -wy * (jy - jx) / jz, -wx * (jy - jx) / jz, 0;
  jac.a.block<3, 3>(10, 10) += dt_ * dwdot_domega;

  jac.b = Eigen::MatrixXd::Zero(13, 6);
  jac.b.block<3, 3>(3, 0) = (dt_ / m) * Eigen::Matrix3d::Identity();
  jac.b.block<3, 3>(10, 3) = dt_ * j_diag.cwiseInverse().asDiagonal();

  jac.c = Eigen::MatrixXd::Zero(13, 4);
  jac.c.block<3, 1>(3, 0) = -(dt_ / (m * m)) * force;
  const double wdot_x = (torque(0) - wy * wz * (jz - jy)) / jx;
  const double wdot_y = (torque(1) - wz * wx * (jx - jz)) / jy;
  const double wdot_z = (torque(2) - wx * wy * (jy - jx)) / jz;
  jac.c(10, 1) = -dt_ * wdot_x / jx;
  jac.c(10, 2) = dt_ * wy * wz / jx;
  jac.c(10, 3) = -dt_ * wy * wz / jx;
  jac.c(11, 1) = -dt_ * wz * wx / jy;
  jac.c(11, 2) = -dt_ * wdot_y / jy;
  jac.c(11, 3) = dt_ * wz * wx / jy;
  jac.c(12, 1) = dt_ * wx * wy / jz;
  jac.c(12, 2) = -dt_ * wx * wy / jz;
  jac.c(12, 3) = -dt_ * wdot_z / jz;

  jac.d = Eigen::MatrixXd::Identity(13, 13);
  return jac;
}

// ------------------------------------------------------------------- planar

Eigen::VectorXd PlanarSpacecraft::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                       const Eigen::VectorXd& theta,
                                       const Eigen::VectorXd& w) const {
  check_inputs(x, u, theta, w);
  const double m = theta(0);
  const double inertia = theta(1);
  const double heading = x(4);
  const double c = std::cos(heading), s = std::sin(heading);
  Eigen::Vector2d accel;
  accel << (c * u(0) - s * u(1)) / m, (s * u(0) + c * u(1)) / m;
  Eigen::VectorXd next(6);
  next(0) = x(0) + dt_ * x(2);
  next(1) = x(1) + dt_ * x(3);
  next(2) = x(2) + dt_ * accel(0);
  next(3) = x(3) + dt_ * accel(1);
  next(4) = x(4) + dt_ * x(5);
  next(5) = x(5) + dt_ * u(2) / inertia;
  return next + w;
}

StepJacobians PlanarSpacecraft::jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                          const Eigen::VectorXd& theta,
                                          const Eigen::VectorXd& w) const {
  check_inputs(x, u, theta, w);
  const double m = theta(0);
  const double inertia = theta(1);
  const double heading = x(4);
  const double c = std::cos(heading), s = std::sin(heading);

  StepJacobians jac;
  jac.a = Eigen::MatrixXd::Identity(6, 6);
  jac.a(0, 2) = dt_;
  jac.a(1, 3) = dt_;
  jac.a(4, 5) = dt_;
  jac.a(2, 4) = dt_ * (-s * u(0) - c * u(1)) / m;
  jac.a(3, 4) = dt_ * (c * u(0) - s * u(1)) / m;

  jac.b = Eigen::MatrixXd::Zero(6, 3);
  jac.b(2, 0) = dt_ * c / m;
  jac.b(2, 1) = -dt_ * s / m;
  jac.b(3, 0) = dt_ * s / m;
  jac.b(3, 1) = dt_ * c / m;
  jac.b(5, 2) = dt_ / inertia;

  jac.c = Eigen::MatrixXd::Zero(6, 2);
  jac.c(2, 0) = -dt_ * (c * u(0) - s * u(1)) / (m * m);
  jac.c(3, 0) = -dt_ * (s * u(0) + c * u(1)) / (m * m);
  jac.c(5, 1) = -dt_ * u(2) / (inertia * inertia);

  jac.d = Eigen::MatrixXd::Identity(6, 6);
  return jac;
}

}  // namespace reachkit::dynamics
