#include "reachkit/planner/scp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace reachkit::planner {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double finite_range(const geometry::AxisAlignedBox& box, double fallback) {
  double best = 0.0;
  for (int i = 0; i < box.dim(); ++i) {
    const double w = box.upper(i) - box.lower(i);
    if (std::isfinite(w)) best = std::max(best, w);
  }
  return best > 0.0 ? best : fallback;
}

double trajectory_cost(const OcpSpec& spec, const std::vector<Eigen::VectorXd>& states,
                       const std::vector<Eigen::VectorXd>& controls) {
  double cost = 0.0;
  for (const auto& u : controls) cost += u.dot(spec.cost.control_weight * u);
  if (spec.cost.terminal_velocity_weight > 0.0 && spec.cost.velocity_dim > 0) {
    cost += spec.cost.terminal_velocity_weight *
            states.back().segment(spec.cost.velocity_offset, spec.cost.velocity_dim).squaredNorm();
  }
  return cost;
}

double constraint_violation(const OcpSpec& spec, const std::vector<Eigen::VectorXd>& states) {
  double v = 0.0;
  const int horizon = static_cast<int>(states.size()) - 1;
  for (int k = 1; k <= horizon; ++k) {
    const Eigen::VectorXd& x = states[k];
    for (int i = 0; i < spec.state_bounds.dim(); ++i) {
      if (std::isfinite(spec.state_bounds.lower(i))) {
        v += std::max(0.0, spec.state_bounds.lower(i) - x(i));
      }
      if (std::isfinite(spec.state_bounds.upper(i))) {
        v += std::max(0.0, x(i) - spec.state_bounds.upper(i));
      }
    }
    for (const auto& obs : spec.obstacles) {
      v += std::max(0.0, -obs.signed_distance(x.head(spec.position_dim)));
    }
  }
  const Eigen::VectorXd& xn = states.back();
  for (int i = 0; i < spec.goal_box.dim(); ++i) {
    if (std::isfinite(spec.goal_box.lower(i))) v += std::max(0.0, spec.goal_box.lower(i) - xn(i));
    if (std::isfinite(spec.goal_box.upper(i))) v += std::max(0.0, xn(i) - spec.goal_box.upper(i));
  }
  return v;
}

struct ReachTube {
  std::vector<geometry::AxisAlignedBox> boxes;       // delta boxes around the nominal
  std::vector<geometry::Ellipsoid> position_shapes;  // positional back-off ellipsoids
};

ReachTube reach_tube(const OcpSpec& spec, const std::vector<Eigen::VectorXd>& controls,
                     const std::vector<Eigen::VectorXd>& nominal) {
  randup::UncertaintySpec uspec = spec.uncertainty;
  uspec.horizon = spec.horizon;
  uspec.control_sets = randup::UncertaintySpec::singleton_controls(controls);

  randup::SamplerConfig cfg;
  cfg.seed = spec.scp.reach_seed;
  cfg.particles = spec.scp.reach_particles;

  randup::EstimateOptions opts;
  opts.hull_max_dim = 0;  // the tightenings only need boxes
  opts.keep_particles = true;
  opts.threads = spec.scp.threads;

  randup::ReachEstimate estimate;
  if (spec.scp.reach_method == ReachMethod::RobUp && cfg.particles >= 2) {
    robup::AdversarialConfig adv;
    adv.step_size = spec.scp.reach_step_size;
    adv.iterations = spec.scp.reach_adv_iterations;
    estimate = robup::rob_up(*spec.model, uspec, cfg, adv, opts).estimate;
  } else {
    estimate = randup::rand_up(*spec.model, uspec, cfg, opts).estimate;
  }

  ReachTube tube;
  tube.boxes.reserve(spec.horizon + 1);
  tube.position_shapes.reserve(spec.horizon + 1);
  for (int k = 0; k <= spec.horizon; ++k) {
    geometry::AxisAlignedBox box = geometry::outer_box(estimate.steps[k].particles, nominal[k]);
    tube.position_shapes.push_back(geometry::box_to_ellipsoid(box, spec.position_dim));
    tube.boxes.push_back(std::move(box));
  }
  return tube;
}

}  // namespace

std::string to_string(ScpStatus s) {
  switch (s) {
    case ScpStatus::Converged:
      return "converged";
    case ScpStatus::InfeasibleSubproblem:
      return "infeasible_subproblem";
    case ScpStatus::MaxIterations:
      return "max_iters";
  }
  return "unknown";
}

std::vector<Eigen::VectorXd> straight_line_init(const OcpSpec& spec) {
  const int n = spec.model->state_dim();
  Eigen::VectorXd target = spec.mu0;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(spec.goal_box.lower(i)) && std::isfinite(spec.goal_box.upper(i))) {
      target(i) = 0.5 * (spec.goal_box.lower(i) + spec.goal_box.upper(i));
    }
  }
  std::vector<Eigen::VectorXd> states(spec.horizon + 1);
  for (int k = 0; k <= spec.horizon; ++k) {
    const double t = static_cast<double>(k) / spec.horizon;
    states[k] = (1.0 - t) * spec.mu0 + t * target;
  }
  return states;
}

AuditReport audit_solution(const OcpSpec& spec, const std::vector<Eigen::VectorXd>& controls) {
  randup::UncertaintySpec uspec = spec.uncertainty;
  uspec.horizon = spec.horizon;
  uspec.control_sets = randup::UncertaintySpec::singleton_controls(controls);
  randup::SamplerConfig cfg;
  cfg.seed = spec.scp.audit_seed;
  cfg.particles = spec.scp.audit_particles;
  randup::EstimateOptions opts;
  opts.hull_max_dim = 0;
  opts.threads = spec.scp.threads;
  randup::RandupResult run = randup::rand_up(*spec.model, uspec, cfg, opts);

  AuditReport report;
  report.particles = cfg.particles;
  report.worst_obstacle_distance = kInf;
  constexpr double tol = 1e-9;
  for (const auto& traj : run.trajectories) {
    bool bound_bad = false, obstacle_bad = false;
    for (int k = 1; k <= spec.horizon; ++k) {
      const Eigen::VectorXd& x = traj.states[k];
      for (int i = 0; i < spec.state_bounds.dim(); ++i) {
        if (x(i) < spec.state_bounds.lower(i) - tol || x(i) > spec.state_bounds.upper(i) + tol) {
          bound_bad = true;
        }
      }
      for (const auto& obs : spec.obstacles) {
        const double sd = obs.signed_distance(x.head(spec.position_dim));
        report.worst_obstacle_distance = std::min(report.worst_obstacle_distance, sd);
        if (sd < -tol) obstacle_bad = true;
      }
    }
    if (bound_bad) ++report.bound_violations;
    if (obstacle_bad) ++report.obstacle_violations;
    if (!spec.goal_box.contains(traj.states.back(), tol)) ++report.goal_violations;
  }
  if (spec.obstacles.empty()) report.worst_obstacle_distance = 0.0;
  return report;
}

ScpResult scp_solve(const OcpSpec& spec, const std::vector<Eigen::VectorXd>& initial_states,
                    const std::vector<Eigen::VectorXd>& initial_controls) {
  const int n = spec.model->state_dim();
  const int m = spec.model->control_dim();
  const int horizon = spec.horizon;
  if (horizon < 1) throw std::invalid_argument("scp_solve: horizon must be >= 1");

  std::vector<Eigen::VectorXd> mu_ref =
      initial_states.empty() ? straight_line_init(spec) : initial_states;
  std::vector<Eigen::VectorXd> u_ref =
      initial_controls.empty()
          ? std::vector<Eigen::VectorXd>(horizon, Eigen::VectorXd::Zero(m))
          : initial_controls;
  if (static_cast<int>(mu_ref.size()) != horizon + 1 ||
      static_cast<int>(u_ref.size()) != horizon) {
    throw std::invalid_argument("scp_solve: initial guess has the wrong horizon");
  }

  const double rho_init = spec.scp.trust_region > 0.0
                              ? spec.scp.trust_region
                              : 0.1 * finite_range(spec.state_bounds, 10.0);
  const double rho_u_init = spec.scp.trust_region_controls > 0.0
                                ? spec.scp.trust_region_controls
                                : finite_range(spec.control_bounds, 1.0);
  double rho = rho_init;
  double rho_u = rho_u_init;

  auto merit = [&](const std::vector<Eigen::VectorXd>& states,
                   const std::vector<Eigen::VectorXd>& controls) {
    return trajectory_cost(spec, states, controls) +
           spec.scp.penalty_weight * constraint_violation(spec, states);
  };

  std::vector<Eigen::VectorXd> mu_dyn = nominal_rollout(spec, u_ref);
  double merit_ref = merit(mu_dyn, u_ref);

  const int nv = (horizon + 1) * n + horizon * m;
  auto ix = [&](int k) { return k * n; };
  auto iu = [&](int k) { return (horizon + 1) * n + k * m; };

  ScpResult result;
  int consecutive_infeasible = 0;
  int accept_streak = 0;
  ReachTube tube;

  for (int iter = 0; iter < spec.scp.max_iterations; ++iter) {
    tube = reach_tube(spec, u_ref, mu_dyn);

    // Tightened per-step boxes on the nominal; dimensions whose back-off
    // exceeds the bound width fall back to the original bounds for this
    // iteration (the tube shrinks as iterates settle).
    std::vector<TightenedBounds> bounds_k(horizon + 1);
    for (int k = 1; k <= horizon; ++k) {
      bounds_k[k] = reformulate_bounds(tube.boxes[k], spec.state_bounds);
      for (int i : bounds_k[k].infeasible_dims) {
        bounds_k[k].lower(i) = spec.state_bounds.lower(i);
        bounds_k[k].upper(i) = spec.state_bounds.upper(i);
      }
    }
    TightenedBounds goal = reformulate_bounds(tube.boxes[horizon], spec.goal_box);
    // Goal infeasibility is not recoverable by falling back (the audit would
    // fail); leave the tightened values and let the QP report it.
    for (int i = 0; i < n; ++i) {
      bounds_k[horizon].lower(i) = std::max(bounds_k[horizon].lower(i), goal.lower(i));
      bounds_k[horizon].upper(i) = std::min(bounds_k[horizon].upper(i), goal.upper(i));
    }

    // Linearized dynamics around the reference.
    QpProblem qp;
    qp.p = Eigen::MatrixXd::Zero(nv, nv);
    qp.q = Eigen::VectorXd::Zero(nv);
    for (int k = 0; k < horizon; ++k) {
      qp.p.block(iu(k), iu(k), m, m) = 2.0 * spec.cost.control_weight;
    }
    if (spec.cost.terminal_velocity_weight > 0.0 && spec.cost.velocity_dim > 0) {
      const int off = ix(horizon) + spec.cost.velocity_offset;
      qp.p.block(off, off, spec.cost.velocity_dim, spec.cost.velocity_dim) +=
          2.0 * spec.cost.terminal_velocity_weight *
          Eigen::MatrixXd::Identity(spec.cost.velocity_dim, spec.cost.velocity_dim);
    }

    const int eq_rows = n * (horizon + 1);
    qp.a = Eigen::MatrixXd::Zero(eq_rows, nv);
    qp.b = Eigen::VectorXd::Zero(eq_rows);
    qp.a.block(0, ix(0), n, n) = Eigen::MatrixXd::Identity(n, n);
    qp.b.head(n) = spec.mu0;
    for (int k = 0; k < horizon; ++k) {
      const dynamics::StepJacobians jac =
          spec.model->jacobians(mu_ref[k], u_ref[k], spec.theta_bar, spec.w_bar);
      const Eigen::VectorXd f =
          spec.model->step(mu_ref[k], u_ref[k], spec.theta_bar, spec.w_bar);
      const int row = n * (k + 1);
      qp.a.block(row, ix(k), n, n) = -jac.a;
      qp.a.block(row, ix(k + 1), n, n) = Eigen::MatrixXd::Identity(n, n);
      qp.a.block(row, iu(k), n, m) = -jac.b;
      qp.b.segment(row, n) = f - jac.a * mu_ref[k] - jac.b * u_ref[k];
    }

    // Inequalities: tightened bounds + goal, obstacles, control box, trust region.
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    auto add_row = [&](int col, int len, const Eigen::VectorXd& coeffs, double bound) {
      if (!std::isfinite(bound)) return;
      Eigen::VectorXd row = Eigen::VectorXd::Zero(nv);
      row.segment(col, len) = coeffs;
      rows.push_back(std::move(row));
      rhs.push_back(bound);
    };
    Eigen::VectorXd unit1 = Eigen::VectorXd::Ones(1);
    for (int k = 1; k <= horizon; ++k) {
      for (int i = 0; i < n; ++i) {
        add_row(ix(k) + i, 1, unit1, bounds_k[k].upper(i));
        add_row(ix(k) + i, 1, -unit1, -bounds_k[k].lower(i));
      }
      for (const auto& obs : spec.obstacles) {
        const Halfspace hs = reformulate_obstacle(tube.position_shapes[k], obs,
                                                  mu_ref[k].head(spec.position_dim));
        add_row(ix(k), spec.position_dim, hs.normal, hs.offset);
      }
      for (int i = 0; i < n; ++i) {
        add_row(ix(k) + i, 1, unit1, mu_ref[k](i) + rho);
        add_row(ix(k) + i, 1, -unit1, -(mu_ref[k](i) - rho));
      }
    }
    for (int k = 0; k < horizon; ++k) {
      for (int i = 0; i < m; ++i) {
        add_row(iu(k) + i, 1, unit1, spec.control_bounds.upper(i));
        add_row(iu(k) + i, 1, -unit1, -spec.control_bounds.lower(i));
        add_row(iu(k) + i, 1, unit1, u_ref[k](i) + rho_u);
        add_row(iu(k) + i, 1, -unit1, -(u_ref[k](i) - rho_u));
      }
    }
    qp.g.resize(static_cast<int>(rows.size()), nv);
    qp.h.resize(static_cast<int>(rows.size()));
    for (size_t r = 0; r < rows.size(); ++r) {
      qp.g.row(static_cast<int>(r)) = rows[r].transpose();
      qp.h(static_cast<int>(r)) = rhs[r];
    }

    QpResult sol = solve_qp(qp, spec.scp.qp_tol, spec.scp.qp_max_iterations);
    const bool usable = sol.status == QpStatus::Solved ||
                        (sol.status == QpStatus::MaxIterations &&
                         sol.primal_residual < 1e-4 && sol.dual_residual < 1e-2);

    ScpIterationInfo info;
    info.iteration = iter;
    info.trust_region = rho;
    info.qp_feasible = usable;

    if (!usable) {
      ++consecutive_infeasible;
      result.history.push_back(info);
      if (consecutive_infeasible >= 2) {
        result.status = ScpStatus::InfeasibleSubproblem;
        break;
      }
      // One retry with a widened trust region. The cap keeps the retry from
      // jumping into a different homotopy class.
      rho = std::min(rho * 2.0, 4.0 * rho_init);
      rho_u = std::min(rho_u * 2.0, 4.0 * rho_u_init);
      continue;
    }
    consecutive_infeasible = 0;

    std::vector<Eigen::VectorXd> u_star(horizon);
    for (int k = 0; k < horizon; ++k) {
      u_star[k] = geometry::project_box(sol.x.segment(iu(k), m), spec.control_bounds);
    }
    std::vector<Eigen::VectorXd> mu_star = nominal_rollout(spec, u_star);
    const double merit_star = merit(mu_star, u_star);

    double step = 0.0;
    for (int k = 0; k <= horizon; ++k) {
      step = std::max(step, (mu_star[k] - mu_dyn[k]).cwiseAbs().maxCoeff());
    }
    double step_u = 0.0;
    for (int k = 0; k < horizon; ++k) {
      step_u = std::max(step_u, (u_star[k] - u_ref[k]).cwiseAbs().maxCoeff());
    }
    info.step_norm = step + step_u;
    info.cost = trajectory_cost(spec, mu_star, u_star);
    info.merit = merit_star;

    if (merit_star <= merit_ref * (1.0 + 1e-12) + 1e-12) {
      info.accepted = true;
      mu_ref = mu_star;
      u_ref = u_star;
      mu_dyn = std::move(mu_star);
      merit_ref = merit_star;
      if (++accept_streak >= 3) {
        rho = std::min(rho * 2.0, 4.0 * rho_init);
        rho_u = std::min(rho_u * 2.0, 4.0 * rho_u_init);
        accept_streak = 0;
      }
      result.history.push_back(info);
      if (info.step_norm < spec.scp.convergence_tol) {
        result.status = ScpStatus::Converged;
        break;
      }
    } else {
      accept_streak = 0;
      rho *= 0.5;
      rho_u *= 0.5;
      result.history.push_back(info);
      if (rho < 1e-6 * rho_init) break;  // stalled
    }
  }

  result.iterations = static_cast<int>(result.history.size());
  result.controls = u_ref;
  result.states = nominal_rollout(spec, u_ref);
  result.cost = trajectory_cost(spec, result.states, result.controls);
  result.reach_boxes = tube.boxes;
  if (result.status == ScpStatus::Converged) {
    result.audit = audit_solution(spec, result.controls);
  }
  return result;
}

}  // namespace reachkit::planner
