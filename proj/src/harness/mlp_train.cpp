#include "reachkit/harness/mlp_train.hpp"

#include <cmath>
#include <stdexcept>

namespace reachkit::harness {

namespace {

struct ForwardCache {
  std::vector<Eigen::MatrixXd> activations;  // a_0 .. a_{L-1} (rows = samples)
  Eigen::MatrixXd output;
};

ForwardCache forward_batch(const dynamics::MlpWeights& net, const Eigen::MatrixXd& inputs) {
  ForwardCache cache;
  cache.activations.push_back(inputs);
  Eigen::MatrixXd a = inputs;
  const size_t layer_count = net.layers.size();
  for (size_t l = 0; l < layer_count; ++l) {
    Eigen::MatrixXd z =
        (a * net.layers[l].w.transpose()).rowwise() + net.layers[l].b.transpose();
    if (l + 1 < layer_count) {
      a = z.array().tanh().matrix();
      cache.activations.push_back(a);
    } else {
      cache.output = std::move(z);
    }
  }
  return cache;
}

}  // namespace

double mlp_loss(const dynamics::MlpWeights& net, const Eigen::MatrixXd& inputs,
                const Eigen::MatrixXd& targets, double l2) {
  const Eigen::MatrixXd out = forward_batch(net, inputs).output;
  double loss = (out - targets).squaredNorm() / static_cast<double>(inputs.rows());
  for (const auto& layer : net.layers) loss += l2 * layer.w.squaredNorm();
  return loss;
}

double mlp_loss_grad(const dynamics::MlpWeights& net, const Eigen::MatrixXd& inputs,
                     const Eigen::MatrixXd& targets, double l2,
                     std::vector<dynamics::MlpWeights::Layer>* grads) {
  const double inv_batch = 1.0 / static_cast<double>(inputs.rows());
  ForwardCache cache = forward_batch(net, inputs);
  const size_t layer_count = net.layers.size();

  grads->resize(layer_count);
  double loss = (cache.output - targets).squaredNorm() * inv_batch;

  Eigen::MatrixXd delta = 2.0 * inv_batch * (cache.output - targets);
  for (size_t l = layer_count; l-- > 0;) {
    (*grads)[l].w = delta.transpose() * cache.activations[l] + 2.0 * l2 * net.layers[l].w;
    (*grads)[l].b = delta.colwise().sum().transpose();
    loss += l2 * net.layers[l].w.squaredNorm();
    if (l > 0) {
      delta = ((delta * net.layers[l].w).array() *
               (1.0 - cache.activations[l].array().square()))
                  .matrix();
    }
  }
  return loss;
}

BatchSampler double_integrator_sampler() {
  return [](Rng& rng, Eigen::MatrixXd& inputs, Eigen::MatrixXd& targets) {
    const int batch = static_cast<int>(inputs.rows());
    for (int b = 0; b < batch; ++b) {
      const double px = rng.uniform(-20.0, 20.0);
      const double py = rng.uniform(-20.0, 20.0);
      const double vx = rng.uniform(-3.0, 3.0);
      const double vy = rng.uniform(-3.0, 3.0);
      const double ux = rng.uniform(-0.4, 0.4) + rng.uniform(-0.02, 0.02);
      const double uy = rng.uniform(-0.4, 0.4) + rng.uniform(-0.02, 0.02);
      inputs.row(b) << px, py, vx, vy, ux, uy;
      // Residual of the true system: x' - x = (v, u).
      targets.row(b) << vx, vy, ux, uy;
    }
  };
}

Eigen::VectorXd double_integrator_input_scale() {
  Eigen::VectorXd s(6);
  s << 20.0, 20.0, 3.0, 3.0, 0.42, 0.42;
  return s;
}

TrainResult train_mlp(const TrainMlpConfig& cfg, const BatchSampler& sampler) {
  if (cfg.widths.size() < 2) throw std::invalid_argument("train_mlp: need at least one layer");
  const int in_dim = cfg.widths.front();
  const int out_dim = cfg.widths.back();

  dynamics::MlpWeights net = dynamics::MlpWeights::zeros(cfg.widths);
  Rng init_rng = Rng::substream(cfg.seed, 0, 11);
  if (!cfg.zero_init) {
    for (size_t l = 0; l < net.layers.size(); ++l) {
      auto& layer = net.layers[l];
      const double bound =
          std::sqrt(6.0 / static_cast<double>(layer.w.rows() + layer.w.cols()));
      for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
        for (Eigen::Index c = 0; c < layer.w.cols(); ++c) {
          layer.w(r, c) = init_rng.uniform(-bound, bound);
        }
      }
      if (l == 0 && cfg.input_scale.size() == in_dim) {
        layer.w = layer.w * cfg.input_scale.cwiseInverse().asDiagonal();
      }
    }
  }

  // Adam state per layer.
  struct Moments {
    Eigen::MatrixXd mw, vw;
    Eigen::VectorXd mb, vb;
  };
  std::vector<Moments> adam(net.layers.size());
  for (size_t l = 0; l < net.layers.size(); ++l) {
    adam[l].mw = Eigen::MatrixXd::Zero(net.layers[l].w.rows(), net.layers[l].w.cols());
    adam[l].vw = adam[l].mw;
    adam[l].mb = Eigen::VectorXd::Zero(net.layers[l].b.size());
    adam[l].vb = adam[l].mb;
  }
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  Eigen::MatrixXd val_in(cfg.val_samples, in_dim), val_tg(cfg.val_samples, out_dim);
  {
    Rng val_rng = Rng::substream(cfg.seed, 0, 99);
    sampler(val_rng, val_in, val_tg);
  }
  auto val_loss = [&]() { return mlp_loss(net, val_in, val_tg, 0.0); };

  TrainResult result;
  Rng data_rng = Rng::substream(cfg.seed, 0, 7);
  Eigen::MatrixXd inputs(cfg.batch, in_dim), targets(cfg.batch, out_dim);
  std::vector<dynamics::MlpWeights::Layer> grads;
  double lr = cfg.lr;
  int step = 0;
  double b1t = 1.0, b2t = 1.0;
  while (step < cfg.max_steps) {
    // Past the nominal step budget, keep going (checking every 200 steps)
    // until the validation target is met or the hard cap is hit.
    if (step >= cfg.steps && step % 200 == 0 && val_loss() < cfg.target_val_loss) break;
    ++step;
    sampler(data_rng, inputs, targets);
    const double loss = mlp_loss_grad(net, inputs, targets, cfg.l2, &grads);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("train_mlp: divergence (non-finite loss) at step " +
                               std::to_string(step));
    }
    if (step % 100 == 1) result.loss_history.push_back(loss);
    b1t *= beta1;
    b2t *= beta2;
    for (size_t l = 0; l < net.layers.size(); ++l) {
      auto& mom = adam[l];
      mom.mw = beta1 * mom.mw + (1.0 - beta1) * grads[l].w;
      mom.vw = beta2 * mom.vw + (1.0 - beta2) * grads[l].w.array().square().matrix();
      mom.mb = beta1 * mom.mb + (1.0 - beta1) * grads[l].b;
      mom.vb = beta2 * mom.vb + (1.0 - beta2) * grads[l].b.array().square().matrix();
      const double corr = std::sqrt(1.0 - b2t) / (1.0 - b1t);
      net.layers[l].w -=
          (lr * corr) * (mom.mw.array() / (mom.vw.array().sqrt() + eps)).matrix();
      net.layers[l].b -=
          (lr * corr) * (mom.mb.array() / (mom.vb.array().sqrt() + eps)).matrix();
    }
    lr *= (1.0 - cfg.lr_decay);
  }

  result.weights = std::move(net);
  result.val_loss = mlp_loss(result.weights, val_in, val_tg, 0.0);
  result.steps_run = step;
  return result;
}

}  // namespace reachkit::harness
