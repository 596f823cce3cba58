#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "reachkit/harness/io.hpp"
#include "reachkit/harness/mlp_train.hpp"
#include "reachkit/harness/thread_pool.hpp"

namespace {

using namespace reachkit;
using harness::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitInfeasible = 3;

std::string base_dir_of(const std::string& path) {
  return std::filesystem::path(path).parent_path().string();
}

int run_reach(const std::string& config_path, const std::string& method, int particles,
              int adv_iters, long seed, const std::string& out_dir, const std::string& format,
              int threads) {
  const json cfg = harness::load_json(config_path);
  harness::ReachProblem problem = harness::reach_problem_from_json(cfg, base_dir_of(config_path));
  if (particles > 0) problem.sampler.particles = particles;
  if (adv_iters > 0) problem.adversarial.iterations = adv_iters;
  if (seed >= 0) problem.sampler.seed = static_cast<std::uint64_t>(seed);

  randup::EstimateOptions opts;
  opts.threads = harness::resolve_threads(threads);
  opts.keep_particles = true;

  harness::ensure_dir(out_dir);
  json out;
  randup::ReachEstimate estimate;
  if (method == "randup") {
    randup::RandupResult result =
        randup::rand_up(*problem.model, problem.uncertainty, problem.sampler, opts);
    estimate = std::move(result.estimate);
    out = harness::reach_estimate_to_json(estimate, problem.include_particles);
    out["method"] = "randup";
  } else if (method == "robup") {
    robup::RobupResult result = robup::rob_up(*problem.model, problem.uncertainty,
                                              problem.sampler, problem.adversarial, opts);
    estimate = std::move(result.estimate);
    out = harness::reach_estimate_to_json(estimate, problem.include_particles);
    out["method"] = "robup";
    out["adversarial_diagnostics"] = harness::diagnostics_to_json(result.diagnostics);
  } else if (method == "lipschitz") {
    if (problem.lipschitz_constants.size() == 0) {
      std::cerr << "reach: lipschitz method needs a \"lipschitz\" config block\n";
      return kExitUsage;
    }
    if (!std::holds_alternative<geometry::Ellipsoid>(problem.uncertainty.x0_set)) {
      std::cerr << "reach: lipschitz method needs an ellipsoidal x0 set\n";
      return kExitUsage;
    }
    const int n = problem.model->state_dim();
    std::vector<lipschitz::LipschitzModelInfo> infos;
    for (int k = 0; k < problem.uncertainty.horizon; ++k) {
      const auto& uset = problem.uncertainty.control_sets[k];
      if ((uset.upper - uset.lower).cwiseAbs().maxCoeff() > 0.0) {
        std::cerr << "reach: lipschitz method needs fixed open-loop controls\n";
        return kExitUsage;
      }
      lipschitz::LipschitzModelInfo info;
      info.affine_map = Eigen::MatrixXd::Identity(n, n);
      info.affine_offset = Eigen::VectorXd::Zero(n);
      const Eigen::VectorXd uk = uset.lower;
      const auto model = problem.model;
      info.residual = [model, uk](const Eigen::VectorXd& x) {
        return (model->step(x, uk, Eigen::VectorXd::Zero(model->param_dim()),
                            Eigen::VectorXd::Zero(model->disturbance_dim())) -
                x)
            .eval();
      };
      info.lipschitz_constants = problem.lipschitz_constants;
      info.paper_literal = problem.lipschitz_literal;
      infos.push_back(std::move(info));
    }
    const auto tube =
        lipschitz::lipschitz_propagate(infos, std::get<geometry::Ellipsoid>(problem.uncertainty.x0_set));
    json steps = json::array();
    for (size_t k = 0; k < tube.size(); ++k) {
      steps.push_back(json{{"k", k},
                           {"center", harness::vector_to_json(tube[k].center)},
                           {"shape", harness::matrix_to_json(tube[k].shape)}});
    }
    out = json{{"schema", "reachkit/ellipsoid_tube/v1"},
               {"method", "lipschitz"},
               {"convention", problem.lipschitz_literal ? "literal" : "sqrt"},
               {"steps", std::move(steps)}};
    harness::write_text(out_dir + "/estimate.json", out.dump(2) + "\n");
    return kExitOk;
  } else {
    std::cerr << "reach: unknown method " << method << "\n";
    return kExitUsage;
  }

  if (format == "csv") {
    // The JSON document is the full record; the CSV is the plot-ready
    // per-dimension box view.
    harness::write_text(out_dir + "/estimate.csv", harness::reach_estimate_to_csv(estimate));
  }
  harness::write_text(out_dir + "/estimate.json", out.dump(2) + "\n");
  return kExitOk;
}

int run_plan(const std::string& config_path, const std::string& out_dir, int threads) {
  const json cfg = harness::load_json(config_path);
  std::vector<Eigen::VectorXd> init_states;
  planner::OcpSpec spec =
      harness::plan_problem_from_json(cfg, base_dir_of(config_path), &init_states);
  spec.scp.threads = harness::resolve_threads(threads);

  const planner::ScpResult result = planner::scp_solve(spec, init_states);
  harness::ensure_dir(out_dir);
  harness::write_text(out_dir + "/solution.json",
                      harness::plan_result_to_json(result).dump(2) + "\n");
  harness::write_text(out_dir + "/trajectory.csv",
                      harness::trajectory_to_csv(result.states, result.controls));
  std::cerr << "plan: status=" << planner::to_string(result.status)
            << " iterations=" << result.iterations << " cost=" << result.cost << "\n";
  if (result.status == planner::ScpStatus::Converged) {
    std::cerr << "plan: audit bound_violations=" << result.audit.bound_violations
              << " obstacle_violations=" << result.audit.obstacle_violations
              << " goal_violations=" << result.audit.goal_violations << "\n";
    return kExitOk;
  }
  return kExitInfeasible;
}

int run_experiment(const std::string& kind, const std::string& config_path,
                   const std::string& out_dir, long seed, int threads,
                   const std::string& weights) {
  json cfg = json::object();
  std::string base_dir;
  if (!config_path.empty()) {
    cfg = harness::load_json(config_path);
    harness::require_schema(cfg, "reachkit/experiment/v1");
    base_dir = base_dir_of(config_path);
  }
  harness::ensure_dir(out_dir);
  const int nthreads = harness::resolve_threads(threads);

  if (kind == "linear_comparison") {
    harness::LinearComparisonConfig c;
    if (cfg.contains("repetitions")) c.repetitions = cfg["repetitions"].get<int>();
    if (cfg.contains("dims")) c.dims = cfg["dims"].get<std::vector<int>>();
    if (cfg.contains("control_bounds")) {
      c.control_bounds = cfg["control_bounds"].get<std::vector<double>>();
    }
    if (cfg.contains("eval_schedule")) {
      c.eval_schedule = cfg["eval_schedule"].get<std::vector<long>>();
    }
    if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
    c.threads = nthreads;
    const auto result = harness::run_linear_comparison(c);
    for (const auto& entry : result.entries) {
      std::ostringstream name;
      name << out_dir << "/linear_n" << entry.dim << "_ub" << entry.control_bound << ".csv";
      harness::write_text(name.str(), harness::coverage_report_to_csv(entry.report));
      std::cerr << "experiment: n=" << entry.dim << " ubar=" << entry.control_bound
                << " wall_ms=" << entry.report.wall_clock_ms << "\n";
    }
    return kExitOk;
  }

  if (kind == "nn_coverage") {
    harness::NnCoverageConfig c;
    c.weights_path = weights;
    if (cfg.contains("weights")) {
      c.weights_path = cfg["weights"].get<std::string>();
      if (!base_dir.empty() && !std::filesystem::path(c.weights_path).is_absolute()) {
        c.weights_path = (std::filesystem::path(base_dir) / c.weights_path).string();
      }
    }
    if (c.weights_path.empty()) {
      std::cerr << "experiment nn_coverage: --weights or config \"weights\" required\n";
      return kExitUsage;
    }
    if (cfg.contains("instances")) c.instances = cfg["instances"].get<int>();
    if (cfg.contains("m_randup")) c.m_randup = cfg["m_randup"].get<int>();
    if (cfg.contains("m_robup")) c.m_robup = cfg["m_robup"].get<int>();
    if (cfg.contains("horizon")) c.horizon = cfg["horizon"].get<int>();
    if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
    c.threads = nthreads;
    const auto result = harness::run_nn_coverage(c);
    harness::write_text(out_dir + "/coverage.csv",
                        harness::coverage_report_to_csv(result.report));
    std::cerr << "experiment: containment checks=" << result.containment_checks
              << " violations=" << result.containment_violations << "\n";
    return kExitOk;
  }

  if (kind == "spacecraft_sweep") {
    harness::SpacecraftSweepConfig c;
    if (cfg.contains("repetitions")) c.repetitions = cfg["repetitions"].get<int>();
    if (cfg.contains("particle_counts")) {
      c.particle_counts = cfg["particle_counts"].get<std::vector<int>>();
    }
    if (cfg.contains("adv_iterations")) {
      c.adv_iterations = cfg["adv_iterations"].get<std::vector<int>>();
    }
    if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
    c.threads = nthreads;
    const auto result = harness::run_spacecraft_sweep(c);
    harness::write_text(out_dir + "/sweep.csv", harness::sweep_result_to_csv(result));
    for (const auto& row : result.rows) {
      std::cerr << "experiment: M=" << row.particles << " n_adv=" << row.adv_iterations
                << " rel_vol=" << row.mean_relative_volume << " wall_ms=" << row.wall_clock_ms
                << "\n";
    }
    return kExitOk;
  }

  if (kind == "spacecraft_plan") {
    if (config_path.empty()) {
      std::cerr << "experiment spacecraft_plan: --config PROBLEM.json required\n";
      return kExitUsage;
    }
    // The config here is a plan problem file, not an experiment file.
    return run_plan(config_path, out_dir, threads);
  }

  if (kind == "sensitivity") {
    if (config_path.empty()) {
      std::cerr << "experiment sensitivity: --config PLAN_PROBLEM.json required\n";
      return kExitUsage;
    }
    const json plan_cfg = harness::load_json(config_path);
    std::vector<Eigen::VectorXd> init_states;
    planner::OcpSpec spec =
        harness::plan_problem_from_json(plan_cfg, base_dir_of(config_path), &init_states);
    spec.scp.threads = nthreads;
    const planner::ScpResult plan = planner::scp_solve(spec, init_states);
    if (plan.status != planner::ScpStatus::Converged) {
      std::cerr << "experiment sensitivity: plan did not converge\n";
      return kExitInfeasible;
    }
    randup::UncertaintySpec uspec = spec.uncertainty;
    uspec.horizon = spec.horizon;
    uspec.control_sets = randup::UncertaintySpec::singleton_controls(plan.controls);
    randup::SamplerConfig scfg;
    scfg.seed = seed >= 0 ? static_cast<std::uint64_t>(seed) : spec.scp.reach_seed;
    scfg.particles = spec.scp.reach_particles;
    robup::AdversarialConfig adv;
    adv.iterations = spec.scp.reach_adv_iterations;
    adv.step_size = spec.scp.reach_step_size;
    randup::EstimateOptions opts;
    opts.hull_max_dim = 0;
    opts.threads = nthreads;
    const robup::RobupResult reach = robup::rob_up(*spec.model, uspec, scfg, adv, opts);
    const auto rows = harness::sensitivity_report(
        reach.trajectories, reach.tuples,
        harness::obstacle_distance(spec.obstacles, spec.position_dim));
    harness::write_text(out_dir + "/sensitivity.csv", harness::sensitivity_to_csv(rows));
    return kExitOk;
  }

  std::cerr << "experiment: unknown kind " << kind << "\n";
  return kExitUsage;
}

int run_train(const std::string& config_path, const std::string& out_path, long seed,
              int steps) {
  harness::TrainMlpConfig c;
  c.input_scale = harness::double_integrator_input_scale();
  if (!config_path.empty()) {
    const json cfg = harness::load_json(config_path);
    harness::require_schema(cfg, "reachkit/train/v1");
    if (cfg.contains("steps")) c.steps = cfg["steps"].get<int>();
    if (cfg.contains("max_steps")) c.max_steps = cfg["max_steps"].get<int>();
    if (cfg.contains("widths")) c.widths = cfg["widths"].get<std::vector<int>>();
    if (cfg.contains("lr")) c.lr = cfg["lr"].get<double>();
    if (cfg.contains("batch")) c.batch = cfg["batch"].get<int>();
    if (cfg.contains("target_val_loss")) {
      c.target_val_loss = cfg["target_val_loss"].get<double>();
    }
  }
  if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
  if (steps > 0) c.steps = steps;
  const harness::TrainResult result =
      harness::train_mlp(c, harness::double_integrator_sampler());
  result.weights.save(out_path);
  std::cerr << "train-mlp: steps=" << result.steps_run << " val_loss=" << result.val_loss
            << " -> " << out_path << "\n";
  return result.val_loss < c.target_val_loss ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-based reachability analysis and robust planning toolkit"};
  app.require_subcommand(1);

  std::string config, out_dir = "out", format = "json", method = "randup", weights;
  long seed = -1;
  int particles = 0, adv_iters = 0, threads = 0, steps = 0;

  CLI::App* reach = app.add_subcommand("reach", "Reachable-set estimation on a problem file");
  reach->add_option("--config", config, "Problem file (reachkit/reach/v1)")->required();
  reach->add_option("--method", method, "randup | robup | lipschitz");
  reach->add_option("--particles", particles, "Sample count M override");
  reach->add_option("--adv-iters", adv_iters, "Adversarial sweep count override");
  reach->add_option("--seed", seed, "RNG seed override");
  reach->add_option("--out", out_dir, "Output directory");
  reach->add_option("--format", format, "json | csv");
  reach->add_option("--threads", threads, "Worker threads (REACHKIT_THREADS overrides)");

  CLI::App* plan = app.add_subcommand("plan", "Robust trajectory optimization (SCP)");
  plan->add_option("--config", config, "Problem file (reachkit/plan/v1)")->required();
  plan->add_option("--out", out_dir, "Output directory");
  plan->add_option("--threads", threads, "Worker threads");

  CLI::App* experiment = app.add_subcommand("experiment", "Named studies");
  std::string kind;
  experiment
      ->add_option("kind", kind,
                   "linear_comparison | nn_coverage | spacecraft_sweep | spacecraft_plan | "
                   "sensitivity")
      ->required();
  experiment->add_option("--config", config, "Experiment or problem file");
  experiment->add_option("--out", out_dir, "Output directory");
  experiment->add_option("--seed", seed, "RNG seed override");
  experiment->add_option("--threads", threads, "Worker threads");
  experiment->add_option("--weights", weights, "Trained MLP weights (nn_coverage)");

  CLI::App* train = app.add_subcommand("train-mlp", "Train the residual network");
  std::string train_out = "mlp_weights.json";
  train->add_option("--config", config, "Training config (reachkit/train/v1)");
  train->add_option("--out", train_out, "Weights output path");
  train->add_option("--seed", seed, "RNG seed");
  train->add_option("--steps", steps, "Training steps override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (reach->parsed()) {
      return run_reach(config, method, particles, adv_iters, seed, out_dir, format, threads);
    }
    if (plan->parsed()) return run_plan(config, out_dir, threads);
    if (experiment->parsed()) {
      return run_experiment(kind, config, out_dir, seed, threads, weights);
    }
    if (train->parsed()) return run_train(config, train_out, seed, steps);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
