#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "reachkit/harness/experiments.hpp"
#include "reachkit/harness/grid_baseline.hpp"
#include "reachkit/harness/io.hpp"
#include "reachkit/harness/mlp_train.hpp"
#include "test_support.hpp"

using namespace reachkit;
using namespace reachkit::harness;

TEST_CASE("grid baseline with inflated cells is exact for the linear system") {
  // Two cells of half-width 0.5 tile X0 = [-1, 1]; their exact reach boxes
  // union to the true set [-1.5, 1.5].
  dynamics::AdditiveLinear model1(1, 0.5);
  const GridBaselineResult two = grid_covering_baseline(model1, 0.5, true);
  CHECK(two.cells_per_dim == 2);
  CHECK(two.union_volume == doctest::Approx(3.0));
  CHECK(two.coverage == doctest::Approx(1.0));

  // A single cell covering all of X0 is exact as well.
  const GridBaselineResult one = grid_covering_baseline(model1, 2.0, true);
  CHECK(one.cells_per_dim == 1);
  CHECK(one.coverage == doctest::Approx(1.0));

  CHECK_THROWS(grid_covering_baseline(model1, 0.0));
}

TEST_CASE("center-point grid reach depends strongly on the control bound") {
  // Evaluations needed for 90% coverage shift materially with ubar.
  auto evals_to_090 = [](double ubar) {
    dynamics::AdditiveLinear model(3, ubar);
    for (int m = 1; m <= 64; ++m) {
      const GridBaselineResult r = grid_covering_baseline(model, 1.0 / m, false);
      if (r.coverage >= 0.9) return static_cast<double>(r.evaluations);
    }
    return std::numeric_limits<double>::infinity();
  };
  const double tight = evals_to_090(0.5);
  const double loose = evals_to_090(2.0);
  CHECK(tight / loose >= 2.0);

  // The rasterized union volume agrees with the product-form computation.
  dynamics::AdditiveLinear m2(2, 0.7);
  for (double delta : {0.9, 0.45, 0.3}) {
    const GridBaselineResult r = grid_covering_baseline(m2, delta, false);
    const double raster = grid_union_volume_rasterized(m2, delta, false);
    CHECK(std::abs(r.union_volume - raster) / r.union_volume < 0.02);
  }
}

TEST_CASE("zero-initialized toy net learns the 1D identity task") {
  TrainMlpConfig cfg;
  cfg.widths = {1, 16, 16, 1};
  cfg.zero_init = true;
  cfg.steps = 100;
  cfg.max_steps = 100;
  cfg.batch = 64;
  cfg.lr = 0.01;
  cfg.target_val_loss = 0.0;  // never met; runs the fixed budget
  cfg.val_samples = 256;
  BatchSampler identity = [](Rng& rng, Eigen::MatrixXd& in, Eigen::MatrixXd& tg) {
    for (int b = 0; b < in.rows(); ++b) {
      const double x = rng.uniform(-1.0, 1.0);
      in(b, 0) = x;
      tg(b, 0) = x;
    }
  };
  const TrainResult result = train_mlp(cfg, identity);
  REQUIRE(result.loss_history.size() >= 2);
  // Recorded losses strictly decrease over the first hundred steps.
  for (size_t i = 1; i < result.loss_history.size(); ++i) {
    CHECK(result.loss_history[i] < result.loss_history[i - 1]);
  }
}

TEST_CASE("training loss gradient matches finite differences at init") {
  Rng rng(511);
  TrainMlpConfig cfg;
  cfg.widths = {3, 8, 2};
  dynamics::MlpWeights net = dynamics::MlpWeights::zeros(cfg.widths);
  for (auto& layer : net.layers) {
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) layer.w(r, c) = 0.3 * rng.normal();
    }
    for (Eigen::Index r = 0; r < layer.b.size(); ++r) layer.b(r) = 0.1 * rng.normal();
  }
  Eigen::MatrixXd in(5, 3), tg(5, 2);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 3; ++c) in(r, c) = rng.normal();
    for (int c = 0; c < 2; ++c) tg(r, c) = rng.normal();
  }
  std::vector<dynamics::MlpWeights::Layer> grads;
  mlp_loss_grad(net, in, tg, 1e-6, &grads);

  for (size_t l = 0; l < net.layers.size(); ++l) {
    for (Eigen::Index r = 0; r < net.layers[l].w.rows(); ++r) {
      for (Eigen::Index c = 0; c < net.layers[l].w.cols(); ++c) {
        dynamics::MlpWeights plus = net, minus = net;
        plus.layers[l].w(r, c) += 1e-6;
        minus.layers[l].w(r, c) -= 1e-6;
        const double fd =
            (mlp_loss(plus, in, tg, 1e-6) - mlp_loss(minus, in, tg, 1e-6)) / 2e-6;
        CHECK(std::abs(fd - grads[l].w(r, c)) <
              1e-4 * std::max(1.0, std::abs(grads[l].w(r, c))));
      }
    }
  }
}

TEST_CASE("sensitivity report finds the extremal particle") {
  dynamics::AdditiveLinear model(2, 0.5);
  randup::UncertaintySpec spec;
  spec.x0_set = geometry::AxisAlignedBox::symmetric(2, 1.0);
  spec.control_sets = {geometry::AxisAlignedBox::symmetric(2, 0.5)};
  spec.horizon = 1;
  randup::SamplerConfig cfg;
  cfg.seed = 5;
  cfg.particles = 200;
  const randup::RandupResult rr = randup::rand_up(model, spec, cfg);

  // Halfspace constraint x1 <= b: margin b - x1, extremal = max x1 particle.
  const double b = 2.0;
  const auto margin = [b](const Eigen::VectorXd& x) { return b - x(0); };
  const auto rows = sensitivity_report(rr.trajectories, rr.tuples, margin);
  REQUIRE(rows.size() == 1);
  int expected = 0;
  for (int j = 1; j < cfg.particles; ++j) {
    if (rr.trajectories[j].states[1](0) > rr.trajectories[expected].states[1](0)) expected = j;
  }
  CHECK(rows[0].particle_index == expected);
  CHECK(rows[0].signed_distance ==
        doctest::Approx(b - rr.trajectories[expected].states[1](0)));
  CHECK(rows[0].signed_distance > 0.0);  // constraint far from all particles

  // A single particle is trivially extremal.
  const auto single = sensitivity_report({rr.trajectories[0]}, {rr.tuples[0]}, margin);
  CHECK(single[0].particle_index == 0);
}

TEST_CASE("spacecraft sweep is monotone in the sample count without adversarial steps") {
  SpacecraftSweepConfig cfg;
  cfg.repetitions = 3;
  cfg.particle_counts = {20, 40, 80};
  cfg.adv_iterations = {0, 1};
  cfg.horizon = 10;
  cfg.seed = 3;
  const SweepResult result = run_spacecraft_sweep(cfg);
  REQUIRE(result.rows.size() == 6);
  // Rows are (M x n_adv) ordered; compare n_adv = 0 entries across M.
  double prev = 0.0;
  for (const auto& row : result.rows) {
    if (row.adv_iterations != 0) continue;
    CHECK(row.mean_relative_volume >= prev);
    prev = row.mean_relative_volume;
  }
  // Relative volumes are normalized by the largest configuration.
  for (const auto& row : result.rows) {
    CHECK(row.mean_relative_volume > 0.0);
    CHECK(row.mean_relative_volume <= 1.0 + 1e-9);
  }
}

TEST_CASE("config files validate their schema") {
  json j;
  j["schema"] = "reachkit/reach/v1";
  CHECK_NOTHROW(require_schema(j, "reachkit/reach/v1"));
  CHECK_THROWS(require_schema(j, "reachkit/plan/v1"));
  CHECK_THROWS(require_schema(json::object(), "reachkit/reach/v1"));

  json model;
  model["name"] = "no_such_model";
  CHECK_THROWS(model_from_json(model, ""));
}

TEST_CASE("box json round trip with unbounded entries") {
  json j;
  j["lower"] = {-1.0, nullptr};
  j["upper"] = {1.0, nullptr};
  const geometry::AxisAlignedBox box = box_from_json(j);
  CHECK(box.lower(0) == -1.0);
  CHECK(std::isinf(box.lower(1)));
  CHECK(box.lower(1) < 0);
  CHECK(std::isinf(box.upper(1)));
  CHECK(box.upper(1) > 0);
}

TEST_CASE("coverage CSV carries the pinned header") {
  CoverageReport report;
  report.rows.push_back({"randup", 100, 1, 0.5, 0.1});
  const std::string csv = coverage_report_to_csv(report);
  CHECK(csv.rfind("method,M,k,mean,std\n", 0) == 0);
  CHECK(csv.find("randup,100,1,0.5,0.1") != std::string::npos);
}
