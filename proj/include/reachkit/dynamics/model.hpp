#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

namespace reachkit::dynamics {

struct StepJacobians {
  Eigen::MatrixXd a;  // d f / d x  (n x n)
  Eigen::MatrixXd b;  // d f / d u  (n x m)
  Eigen::MatrixXd c;  // d f / d theta  (n x p)
  Eigen::MatrixXd d;  // d f / d w  (n x q)
};

/// Discrete-time model x_{k+1} = f(x_k, u_k, theta, w_k) with analytic
/// Jacobians in all four arguments. Models are immutable after construction;
/// step and jacobians are pure.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual int param_dim() const = 0;
  virtual int disturbance_dim() const = 0;
  virtual std::string name() const = 0;

  virtual Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const = 0;
  virtual StepJacobians jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const = 0;

 protected:
  /// Shape and finiteness validation shared by implementations.
  void check_inputs(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const;
};

/// One sampled parameter tuple z = (x0, u_{0:N-1}, theta, w_{0:N-1}); theta is
/// a single vector shared across timesteps, one disturbance per transition.
struct ParamTuple {
  Eigen::VectorXd x0;
  std::vector<Eigen::VectorXd> controls;
  Eigen::VectorXd theta;
  std::vector<Eigen::VectorXd> disturbances;

  int horizon() const { return static_cast<int>(controls.size()); }
};

struct Trajectory {
  std::vector<Eigen::VectorXd> states;  // N+1 entries, states[0] = x0

  int horizon() const { return static_cast<int>(states.size()) - 1; }
};

/// Deterministic N-step rollout. Throws if a propagated state turns
/// non-finite, reporting the offending timestep.
Trajectory rollout(const DynamicsModel& model, const ParamTuple& z, int horizon);

struct ParamGradient {
  Eigen::VectorXd x0;
  std::vector<Eigen::VectorXd> controls;
  Eigen::VectorXd theta;
  std::vector<Eigen::VectorXd> disturbances;

  ParamGradient& operator+=(const ParamGradient& o);
  ParamGradient& operator*=(double s);
  Eigen::VectorXd flatten() const;
};

/// Reverse-mode gradient of sum_k seeds[k-1]^T x_k(z), k = 1..N, with respect
/// to every component of z. The theta gradient accumulates contributions from
/// all timesteps.
ParamGradient rollout_gradient(const DynamicsModel& model, const ParamTuple& z, int horizon,
                               const std::vector<Eigen::VectorXd>& seeds);

}  // namespace reachkit::dynamics
