#pragma once

#include <functional>

#include "reachkit/dynamics/models.hpp"
#include "reachkit/rng.hpp"

namespace reachkit::harness {

/// Fills a batch: one sample per row, raw (unnormalized) units.
using BatchSampler = std::function<void(Rng&, Eigen::MatrixXd& inputs, Eigen::MatrixXd& targets)>;

struct TrainMlpConfig {
  std::vector<int> widths{6, 128, 128, 4};  // including input/output layers
  int steps = 10000;
  int max_steps = 30000;  // training extends past `steps` while the target is missed
  int batch = 20;
  double lr = 0.02;
  double lr_decay = 1e-6;  // per-step factor (1 - decay)
  double l2 = 1e-6;
  double target_val_loss = 1e-6;
  int val_samples = 2000;
  std::uint64_t seed = 0;
  Eigen::VectorXd input_scale;  // first-layer init is scaled by 1/scale; empty = ones
  bool zero_init = false;
};

struct TrainResult {
  dynamics::MlpWeights weights;
  double val_loss = 0.0;  // mean per-sample squared error
  int steps_run = 0;
  std::vector<double> loss_history;  // training loss every 100 steps
};

/// Adam on the single-step quadratic loss with L2 regularization; batches are
/// re-sampled every step. Throws on divergence (NaN loss), reporting the step.
TrainResult train_mlp(const TrainMlpConfig& cfg, const BatchSampler& sampler);

/// Ground-truth sampler for the double-integrator residual task: states and
/// controls drawn fresh each step, targets x' - x of the true system.
BatchSampler double_integrator_sampler();
/// The matching input scale (positions, velocities, controls).
Eigen::VectorXd double_integrator_input_scale();

/// Training loss (mean per-sample squared error + L2 term) and its gradient,
/// exposed for finite-difference checks.
double mlp_loss(const dynamics::MlpWeights& net, const Eigen::MatrixXd& inputs,
                const Eigen::MatrixXd& targets, double l2);
double mlp_loss_grad(const dynamics::MlpWeights& net, const Eigen::MatrixXd& inputs,
                     const Eigen::MatrixXd& targets, double l2,
                     std::vector<dynamics::MlpWeights::Layer>* grads);

}  // namespace reachkit::harness
