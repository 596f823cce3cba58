#include "reachkit/harness/experiments.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "reachkit/harness/thread_pool.hpp"
#include "reachkit/rng.hpp"

namespace reachkit::harness {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd ms;
  if (xs.empty()) return ms;
  for (double x : xs) ms.mean += x;
  ms.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - ms.mean) * (x - ms.mean);
    ms.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return ms;
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return Rng::substream(seed, a, b).next_u64();
}

}  // namespace

// ----------------------------------------------------------- linear study

double LinearComparisonResult::evals_to_reach(const CoverageReport& report,
                                              const std::string& method, double level) {
  // Collect (budget, mean) for k = 1 in budget order.
  std::vector<std::pair<long, double>> pts;
  for (const auto& row : report.rows) {
    if (row.method == method && row.k == 1) pts.emplace_back(row.budget, row.mean);
  }
  std::sort(pts.begin(), pts.end());
  if (pts.empty()) return std::numeric_limits<double>::infinity();
  if (pts.front().second >= level) return static_cast<double>(pts.front().first);
  for (size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].second >= level) {
      // Log-linear interpolation in the budget.
      const double c0 = pts[i - 1].second, c1 = pts[i].second;
      const double l0 = std::log(static_cast<double>(pts[i - 1].first));
      const double l1 = std::log(static_cast<double>(pts[i].first));
      const double t = (level - c0) / std::max(1e-12, c1 - c0);
      return std::exp(l0 + t * (l1 - l0));
    }
  }
  return std::numeric_limits<double>::infinity();
}

LinearComparisonResult run_linear_comparison(const LinearComparisonConfig& cfg) {
  LinearComparisonResult result;
  const int threads = resolve_threads(cfg.threads);

  for (int n : cfg.dims) {
    for (double ubar : cfg.control_bounds) {
      const auto t0 = Clock::now();
      dynamics::AdditiveLinear model(n, ubar);
      const double true_vol = std::pow(2.0 * (1.0 + ubar), n);

      randup::UncertaintySpec spec;
      spec.x0_set = geometry::AxisAlignedBox::symmetric(n, 1.0);
      spec.control_sets = {geometry::AxisAlignedBox::symmetric(n, ubar)};
      spec.horizon = 1;

      CoverageReport report;
      struct Cell {
        std::vector<double> randup, robup;
      };
      std::vector<Cell> cells(cfg.eval_schedule.size());
      for (auto& c : cells) {
        c.randup.resize(cfg.repetitions);
        c.robup.resize(cfg.repetitions);
      }

      // (budget, repetition) work items fan out to the pool.
      const int jobs = static_cast<int>(cfg.eval_schedule.size()) * cfg.repetitions;
      parallel_for(jobs, threads, [&](int job) {
        const int bi = job / cfg.repetitions;
        const int rep = job % cfg.repetitions;
        const long budget = cfg.eval_schedule[bi];
        randup::SamplerConfig scfg;
        scfg.particles = static_cast<int>(budget);
        scfg.seed = derived_seed(cfg.seed, static_cast<std::uint64_t>(rep),
                                 1000 + static_cast<std::uint64_t>(n));
        randup::EstimateOptions opts;
        opts.threads = 1;
        auto rr = randup::rand_up(model, spec, scfg, opts);
        cells[bi].randup[rep] =
            geometry::hull_volume(*rr.estimate.steps[1].hull) / true_vol;

        robup::AdversarialConfig adv;
        adv.step_size = cfg.step_size;
        adv.iterations = cfg.adv_iterations;
        scfg.particles = std::max(2, static_cast<int>(budget / (adv.iterations + 1)));
        auto br = robup::rob_up(model, spec, scfg, adv, opts);
        cells[bi].robup[rep] =
            geometry::hull_volume(*br.estimate.steps[1].hull) / true_vol;
      });

      for (size_t bi = 0; bi < cfg.eval_schedule.size(); ++bi) {
        const long budget = cfg.eval_schedule[bi];
        const MeanStd rs = mean_std(cells[bi].randup);
        const MeanStd bs = mean_std(cells[bi].robup);
        const long robup_evals =
            std::max(2L, budget / (cfg.adv_iterations + 1)) * (cfg.adv_iterations + 1);
        report.rows.push_back({"randup", budget, 1, rs.mean, rs.stddev});
        report.rows.push_back({"robup", robup_evals, 1, bs.mean, bs.stddev});
      }
      for (int m = 1; m <= cfg.max_grid_cells_per_dim; ++m) {
        const double delta = 1.0 / m;
        const GridBaselineResult gb = grid_covering_baseline(model, delta, false);
        report.rows.push_back({"grid", gb.evaluations, 1, gb.coverage, 0.0});
      }
      report.wall_clock_ms = ms_since(t0);
      result.entries.push_back({n, ubar, std::move(report)});
    }
  }
  return result;
}

// ------------------------------------------------------- NN coverage study

NnCoverageResult run_nn_coverage(const NnCoverageConfig& cfg) {
  if (cfg.weights_path.empty()) {
    throw std::invalid_argument("nn_coverage: trained weights are required");
  }
  const dynamics::MlpWeights net = dynamics::MlpWeights::load(cfg.weights_path);
  const dynamics::MlpResidual model(net, 4, 2);
  const dynamics::DoubleIntegrator truth;
  const Eigen::MatrixXd a_true = dynamics::DoubleIntegrator::state_matrix();
  const Eigen::MatrixXd b_true = dynamics::DoubleIntegrator::control_matrix();
  const int threads = resolve_threads(cfg.threads);
  const int horizon = cfg.horizon;

  Eigen::MatrixXd q0 = Eigen::MatrixXd::Zero(4, 4);
  q0.diagonal() << 1e-2, 1e-2, 2e-3, 2e-3;

  struct InstanceOut {
    std::vector<double> randup, robup, lip_sqrt, lip_literal;  // per k = 0..N
    long checks = 0;
    long violations = 0;
  };
  std::vector<InstanceOut> outs(cfg.instances);

  parallel_for(cfg.instances, threads, [&](int b) {
    Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(b), 50);
    Eigen::VectorXd mu0(4);
    mu0 << rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-1.0, 1.0),
        rng.uniform(-1.0, 1.0);
    Eigen::Vector2d ubar(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));
    std::vector<Eigen::VectorXd> controls(horizon);
    for (int k = 0; k < horizon; ++k) {
      Eigen::VectorXd u(2);
      u << ubar(0) + rng.uniform(-0.005, 0.005), ubar(1) + rng.uniform(-0.005, 0.005);
      controls[k] = u;
    }

    randup::UncertaintySpec spec;
    spec.x0_set = geometry::Ellipsoid(mu0, q0);
    spec.control_sets = randup::UncertaintySpec::singleton_controls(controls);
    spec.horizon = horizon;

    // True reachable sets of the exact linear system: affine images of the
    // initial ellipsoid (controls are singletons).
    std::vector<randup::VolumeOracle> oracles;
    {
      Eigen::MatrixXd ak = Eigen::MatrixXd::Identity(4, 4);
      Eigen::VectorXd ck = Eigen::VectorXd::Zero(4);
      oracles.push_back(randup::VolumeOracle::ellipsoid(geometry::Ellipsoid(mu0, q0)));
      for (int k = 0; k < horizon; ++k) {
        ck = a_true * ck + b_true * controls[k];
        ak = a_true * ak;
        geometry::Ellipsoid ek(ak * mu0 + ck, ak * q0 * ak.transpose());
        oracles.push_back(randup::VolumeOracle::ellipsoid(ek));
      }
    }

    InstanceOut& out = outs[b];
    randup::SamplerConfig scfg;
    scfg.seed = derived_seed(cfg.seed, static_cast<std::uint64_t>(b), 51);
    scfg.particles = cfg.m_randup;
    randup::EstimateOptions opts;
    opts.threads = 1;
    const randup::RandupResult rr = randup::rand_up(model, spec, scfg, opts);
    for (int k = 0; k <= horizon; ++k) {
      out.randup.push_back(geometry::hull_volume(*rr.estimate.steps[k].hull) /
                           oracles[k].volume());
    }

    robup::AdversarialConfig adv;
    adv.step_size = cfg.step_size;
    adv.iterations = cfg.adv_iterations;
    randup::SamplerConfig rcfg = scfg;
    rcfg.particles = cfg.m_robup;
    const robup::RobupResult br = robup::rob_up(model, spec, rcfg, adv, opts);
    for (int k = 0; k <= horizon; ++k) {
      out.robup.push_back(geometry::hull_volume(*br.estimate.steps[k].hull) /
                          oracles[k].volume());
    }

    // Lipschitz baseline around the same open-loop controls, both radius
    // conventions; the model residual g(., u_k) folds the control in per step.
    auto make_infos = [&](bool literal) {
      std::vector<lipschitz::LipschitzModelInfo> infos;
      for (int k = 0; k < horizon; ++k) {
        lipschitz::LipschitzModelInfo info;
        info.affine_map = Eigen::MatrixXd::Identity(4, 4);
        info.affine_offset = Eigen::VectorXd::Zero(4);
        const Eigen::VectorXd uk = controls[k];
        info.residual = [&net, uk](const Eigen::VectorXd& x) {
          Eigen::VectorXd in(6);
          in << x, uk;
          return net.forward(in);
        };
        info.lipschitz_constants = Eigen::VectorXd::Zero(4);
        info.lipschitz_constants(0) = 1.0;
        info.lipschitz_constants(1) = 1.0;
        info.paper_literal = literal;
        infos.push_back(std::move(info));
      }
      return infos;
    };
    const geometry::Ellipsoid e0(mu0, q0);
    const auto tube_sound = lipschitz::lipschitz_propagate(make_infos(false), e0);
    const auto tube_literal = lipschitz::lipschitz_propagate(make_infos(true), e0);
    for (int k = 0; k <= horizon; ++k) {
      out.lip_sqrt.push_back(randup::coverage(tube_sound[k], oracles[k]));
      out.lip_literal.push_back(randup::coverage(tube_literal[k], oracles[k]));
    }

    // Containment audit of the sound tube over sampled trajectories.
    const int n_traj = std::min<int>(cfg.containment_trajectories,
                                     static_cast<int>(rr.trajectories.size()));
    for (int j = 0; j < n_traj; ++j) {
      for (int k = 0; k <= horizon; ++k) {
        ++out.checks;
        if (!tube_sound[k].contains(rr.trajectories[j].states[k], 1e-9)) ++out.violations;
      }
    }
  });

  NnCoverageResult result;
  for (int k = 0; k <= horizon; ++k) {
    std::vector<double> r, ro, ls, ll;
    for (const auto& o : outs) {
      r.push_back(o.randup[k]);
      ro.push_back(o.robup[k]);
      ls.push_back(o.lip_sqrt[k]);
      ll.push_back(o.lip_literal[k]);
    }
    const MeanStd mr = mean_std(r), mro = mean_std(ro), mls = mean_std(ls), mll = mean_std(ll);
    result.report.rows.push_back({"randup", cfg.m_randup, k, mr.mean, mr.stddev});
    result.report.rows.push_back(
        {"robup", static_cast<long>(cfg.m_robup) * (cfg.adv_iterations + 1), k, mro.mean,
         mro.stddev});
    result.report.rows.push_back({"lipschitz_sqrt", 0, k, mls.mean, mls.stddev});
    result.report.rows.push_back({"lipschitz_literal", 0, k, mll.mean, mll.stddev});
  }
  for (const auto& o : outs) {
    result.containment_checks += o.checks;
    result.containment_violations += o.violations;
    result.randup_coverage.push_back(o.randup);
    result.robup_coverage.push_back(o.robup);
  }
  return result;
}

// --------------------------------------------------------- spacecraft sweep

geometry::AxisAlignedBox spacecraft_theta_box() {
  Eigen::VectorXd lo(4), hi(4);
  lo << 7.1, 0.065, 0.065, 0.065;
  hi << 7.3, 0.075, 0.075, 0.075;
  return {lo, hi};
}

geometry::AxisAlignedBox spacecraft_disturbance_box() {
  Eigen::VectorXd hw = Eigen::VectorXd::Constant(13, 1e-4);
  hw.segment(3, 3).setConstant(5e-4);
  return geometry::AxisAlignedBox::centered(Eigen::VectorXd::Zero(13), hw);
}

SweepResult run_spacecraft_sweep(const SpacecraftSweepConfig& cfg) {
  const dynamics::Spacecraft13 model;
  const int threads = resolve_threads(cfg.threads);
  const int horizon = cfg.horizon;

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(13);
  x0(9) = 1.0;  // identity attitude, at rest

  const int n_m = static_cast<int>(cfg.particle_counts.size());
  const int n_adv = static_cast<int>(cfg.adv_iterations.size());
  struct Cell {
    std::vector<double> volumes;
    std::vector<double> wall_ms;  // per repetition; summed after the fan-out
  };
  std::vector<Cell> cells(n_m * n_adv);
  for (auto& c : cells) {
    c.volumes.resize(cfg.repetitions, 0.0);
    c.wall_ms.resize(cfg.repetitions, 0.0);
  }

  parallel_for(cfg.repetitions, threads, [&](int rep) {
    Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(rep), 60);
    std::vector<Eigen::VectorXd> controls(horizon);
    for (int k = 0; k < horizon; ++k) {
      Eigen::VectorXd u(6);
      for (int i = 0; i < 3; ++i) u(i) = rng.uniform(-0.1, 0.1);
      for (int i = 3; i < 6; ++i) u(i) = rng.uniform(-0.01, 0.01);
      controls[k] = u;
    }

    randup::UncertaintySpec spec;
    spec.x0_set = geometry::AxisAlignedBox::singleton(x0);
    spec.control_sets = randup::UncertaintySpec::singleton_controls(controls);
    spec.theta_set = spacecraft_theta_box();
    spec.disturbance_set = spacecraft_disturbance_box();
    spec.horizon = horizon;

    randup::EstimateOptions opts;
    opts.hull_max_dim = 0;  // positional hulls are built below
    opts.threads = 1;

    for (int mi = 0; mi < n_m; ++mi) {
      for (int ai = 0; ai < n_adv; ++ai) {
        randup::SamplerConfig scfg;
        scfg.seed = derived_seed(cfg.seed, static_cast<std::uint64_t>(rep), 61);
        scfg.particles = cfg.particle_counts[mi];
        const auto t0 = Clock::now();
        Eigen::MatrixXd cloud;
        if (cfg.adv_iterations[ai] == 0) {
          cloud = randup::rand_up(model, spec, scfg, opts)
                      .estimate.steps[horizon]
                      .particles.leftCols(3);
        } else {
          robup::AdversarialConfig adv;
          adv.step_size = cfg.step_size;
          adv.iterations = cfg.adv_iterations[ai];
          cloud = robup::rob_up(model, spec, scfg, adv, opts)
                      .estimate.steps[horizon]
                      .particles.leftCols(3);
        }
        const double vol = geometry::hull_volume(geometry::convex_hull(cloud));
        Cell& cell = cells[mi * n_adv + ai];
        cell.volumes[rep] = vol;
        cell.wall_ms[rep] = ms_since(t0);
      }
    }
  });

  // Relative positional volume against the largest configuration, per rep.
  const Cell& largest = cells[(n_m - 1) * n_adv + (n_adv - 1)];
  SweepResult result;
  for (int mi = 0; mi < n_m; ++mi) {
    for (int ai = 0; ai < n_adv; ++ai) {
      const Cell& cell = cells[mi * n_adv + ai];
      double mean = 0.0;
      double wall = 0.0;
      for (int rep = 0; rep < cfg.repetitions; ++rep) {
        mean += cell.volumes[rep] / std::max(1e-300, largest.volumes[rep]);
        wall += cell.wall_ms[rep];
      }
      mean /= cfg.repetitions;
      result.rows.push_back(
          {cfg.particle_counts[mi], cfg.adv_iterations[ai], mean, wall / cfg.repetitions});
    }
  }
  return result;
}

// -------------------------------------------------------------- sensitivity

std::function<double(const Eigen::VectorXd&)> obstacle_distance(
    const std::vector<planner::Obstacle>& obstacles, int position_dim) {
  return [obstacles, position_dim](const Eigen::VectorXd& x) {
    double sd = std::numeric_limits<double>::infinity();
    for (const auto& obs : obstacles) {
      sd = std::min(sd, obs.signed_distance(x.head(position_dim)));
    }
    return sd;
  };
}

std::vector<SensitivityRow> sensitivity_report(
    const std::vector<dynamics::Trajectory>& trajectories,
    const std::vector<dynamics::ParamTuple>& tuples,
    const std::function<double(const Eigen::VectorXd&)>& signed_distance) {
  if (trajectories.empty() || trajectories.size() != tuples.size()) {
    throw std::invalid_argument("sensitivity_report: trajectories/tuples mismatch");
  }
  const int horizon = trajectories.front().horizon();
  std::vector<SensitivityRow> rows;
  for (int k = 1; k <= horizon; ++k) {
    SensitivityRow row;
    row.k = k;
    row.signed_distance = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < trajectories.size(); ++j) {
      const double sd = signed_distance(trajectories[j].states[k]);
      if (sd < row.signed_distance) {
        row.signed_distance = sd;
        row.particle_index = static_cast<int>(j);
      }
    }
    const auto& z = tuples[row.particle_index];
    row.theta = z.theta;
    row.disturbance = z.disturbances.empty() ? Eigen::VectorXd() : z.disturbances[k - 1];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace reachkit::harness
