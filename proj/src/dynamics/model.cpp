#include "reachkit/dynamics/model.hpp"

#include <stdexcept>

namespace reachkit::dynamics {

void DynamicsModel::check_inputs(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& theta, const Eigen::VectorXd& w) const {
  if (x.size() != state_dim() || u.size() != control_dim() || theta.size() != param_dim() ||
      w.size() != disturbance_dim()) {
    throw std::invalid_argument(name() + ": step dimension mismatch");
  }
  if (!x.allFinite() || !u.allFinite() || !theta.allFinite() || !w.allFinite()) {
    throw std::domain_error(name() + ": non-finite step input");
  }
}

Trajectory rollout(const DynamicsModel& model, const ParamTuple& z, int horizon) {
  if (static_cast<int>(z.controls.size()) < horizon ||
      static_cast<int>(z.disturbances.size()) < horizon) {
    throw std::invalid_argument("rollout: tuple shorter than horizon");
  }
  Trajectory traj;
  traj.states.reserve(horizon + 1);
  traj.states.push_back(z.x0);
  for (int k = 0; k < horizon; ++k) {
    Eigen::VectorXd next =
        model.step(traj.states.back(), z.controls[k], z.theta, z.disturbances[k]);
    if (!next.allFinite()) {
      throw std::runtime_error("rollout: non-finite state at timestep " + std::to_string(k + 1));
    }
    traj.states.push_back(std::move(next));
  }
  return traj;
}

ParamGradient& ParamGradient::operator+=(const ParamGradient& o) {
  x0 += o.x0;
  theta += o.theta;
  for (size_t k = 0; k < controls.size(); ++k) controls[k] += o.controls[k];
  for (size_t k = 0; k < disturbances.size(); ++k) disturbances[k] += o.disturbances[k];
  return *this;
}

ParamGradient& ParamGradient::operator*=(double s) {
  x0 *= s;
  theta *= s;
  for (auto& g : controls) g *= s;
  for (auto& g : disturbances) g *= s;
  return *this;
}

Eigen::VectorXd ParamGradient::flatten() const {
  Eigen::Index total = x0.size() + theta.size();
  for (const auto& g : controls) total += g.size();
  for (const auto& g : disturbances) total += g.size();
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  out.segment(at, x0.size()) = x0;
  at += x0.size();
  for (const auto& g : controls) {
    out.segment(at, g.size()) = g;
    at += g.size();
  }
  out.segment(at, theta.size()) = theta;
  at += theta.size();
  for (const auto& g : disturbances) {
    out.segment(at, g.size()) = g;
    at += g.size();
  }
  return out;
}

ParamGradient rollout_gradient(const DynamicsModel& model, const ParamTuple& z, int horizon,
                               const std::vector<Eigen::VectorXd>& seeds) {
  if (static_cast<int>(seeds.size()) != horizon) {
    throw std::invalid_argument("rollout_gradient: need one seed per timestep k = 1..N");
  }
  for (const auto& s : seeds) {
    if (s.size() != model.state_dim()) {
      throw std::invalid_argument("rollout_gradient: seed dimension mismatch");
    }
  }

  // Forward pass: states and per-step Jacobians.
  Trajectory traj = rollout(model, z, horizon);
  std::vector<StepJacobians> jacs(horizon);
  for (int k = 0; k < horizon; ++k) {
    jacs[k] = model.jacobians(traj.states[k], z.controls[k], z.theta, z.disturbances[k]);
  }

  ParamGradient grad;
  grad.theta = Eigen::VectorXd::Zero(model.param_dim());
  grad.controls.assign(horizon, Eigen::VectorXd());
  grad.disturbances.assign(horizon, Eigen::VectorXd());

  // Backward pass: adjoint[k] = d (sum seeds . x) / d x_k.
  Eigen::VectorXd adjoint = seeds[horizon - 1];
  for (int k = horizon - 1; k >= 0; --k) {
    grad.controls[k] = jacs[k].b.transpose() * adjoint;
    grad.disturbances[k] = jacs[k].d.transpose() * adjoint;
    grad.theta += jacs[k].c.transpose() * adjoint;
    adjoint = (jacs[k].a.transpose() * adjoint).eval();
    if (k >= 1) adjoint += seeds[k - 1];
  }
  grad.x0 = adjoint;
  return grad;
}

}  // namespace reachkit::dynamics
