#pragma once

#include <json.hpp>

#include "reachkit/dynamics/model.hpp"

namespace reachkit::dynamics {

/// x_{k+1} = x_k + u_k in R^n. `control_bound` is the conventional magnitude
/// of the control box used by the experiment drivers.
class AdditiveLinear : public DynamicsModel {
 public:
  explicit AdditiveLinear(int n, double control_bound = 1.0);

  int state_dim() const override { return n_; }
  int control_dim() const override { return n_; }
  int param_dim() const override { return 0; }
  int disturbance_dim() const override { return 0; }
  std::string name() const override { return "additive_linear"; }
  double control_bound() const { return control_bound_; }

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const override;
  StepJacobians jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                          const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const override;

 private:
  int n_;
  double control_bound_;
};

/// p_{k+1} = p_k + v_k, v_{k+1} = v_k + u_k with x = (p, v) in R^4, u in R^2.
class DoubleIntegrator : public DynamicsModel {
 public:
  int state_dim() const override { return 4; }
  int control_dim() const override { return 2; }
  int param_dim() const override { return 0; }
  int disturbance_dim() const override { return 0; }
  std::string name() const override { return "double_integrator"; }

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const override;
  StepJacobians jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                          const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const override;

  static Eigen::MatrixXd state_matrix();    // 4x4 A
  static Eigen::MatrixXd control_matrix();  // 4x2 B
};

/// Feed-forward layers with tanh hidden activations and an identity output
/// layer. Serializes to {"layers": [{"W": [[..]], "b": [..]}], "activation":
/// "tanh"} with row-major matrices.
struct MlpWeights {
  struct Layer {
    Eigen::MatrixXd w;
    Eigen::VectorXd b;
  };
  std::vector<Layer> layers;

  int input_dim() const;
  int output_dim() const;
  void validate() const;

  Eigen::VectorXd forward(const Eigen::VectorXd& in) const;
  /// Jacobian of forward() at `in` via reverse accumulation through the
  /// diag(1 - a^2) tanh rule.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& in) const;

  nlohmann::json to_json() const;
  static MlpWeights from_json(const nlohmann::json& j);
  static MlpWeights load(const std::string& path);
  void save(const std::string& path) const;

  /// Zero-initialized network with the given layer widths.
  static MlpWeights zeros(const std::vector<int>& widths);
};

/// Residual model x' = x + g(x, u) with g a learned MLP taking [x; u].
class MlpResidual : public DynamicsModel {
 public:
  MlpResidual(MlpWeights net, int state_dim, int control_dim);

  int state_dim() const override { return n_; }
  int control_dim() const override { return m_; }
  int param_dim() const override { return 0; }
  int disturbance_dim() const override { return 0; }
  std::string name() const override { return "mlp_residual"; }
  const MlpWeights& net() const { return net_; }

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const override;
  StepJacobians jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                          const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const override;

 private:
  MlpWeights net_;
  int n_;
  int m_;
};

/// Rigid-body spacecraft, state [r, v, q, omega] in R^13 with scalar-last
/// quaternion q = (qx, qy, qz, qw), controls [F, M] in R^6, parameters
/// theta = (m, Jx, Jy, Jz), additive disturbance on all 13 states. Euler
/// discretization with zero-order hold; the quaternion is not renormalized,
/// drift is measured rather than corrected.
class Spacecraft13 : public DynamicsModel {
 public:
  explicit Spacecraft13(double dt = 5.0) : dt_(dt) {}

  int state_dim() const override { return 13; }
  int control_dim() const override { return 6; }
  int param_dim() const override { return 4; }
  int disturbance_dim() const override { return 13; }
  std::string name() const override { return "spacecraft13"; }
  double dt() const { return dt_; }

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const override;
  StepJacobians jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                          const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const override;

 private:
  double dt_;
};

/// Planar free-flyer, state (px, py, vx, vy, heading, turn rate) in R^6,
/// controls (Fx, Fy, Mz) with the force in the body frame, theta = (m, J),
/// additive disturbance on all 6 states. Euler discretization.
class PlanarSpacecraft : public DynamicsModel {
 public:
  explicit PlanarSpacecraft(double dt = 5.0) : dt_(dt) {}

  int state_dim() const override { return 6; }
  int control_dim() const override { return 3; }
  int param_dim() const override { return 2; }
  int disturbance_dim() const override { return 6; }
  std::string name() const override { return "planar_spacecraft"; }
  double dt() const { return dt_; }

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const override;
  StepJacobians jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                          const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const override;

 private:
  double dt_;
};

}  // namespace reachkit::dynamics
