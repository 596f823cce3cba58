#pragma once

#include "reachkit/planner/ocp.hpp"
#include "reachkit/planner/qp.hpp"

namespace reachkit::planner {

enum class ScpStatus { Converged, InfeasibleSubproblem, MaxIterations };

std::string to_string(ScpStatus s);

struct ScpIterationInfo {
  int iteration = 0;
  double cost = 0.0;
  double merit = 0.0;
  double step_norm = 0.0;   // |mu' - mu| + |u' - u|
  double trust_region = 0.0;
  bool accepted = false;
  bool qp_feasible = true;
};

struct AuditReport {
  int particles = 0;
  int bound_violations = 0;
  int obstacle_violations = 0;
  int goal_violations = 0;
  double worst_obstacle_distance = 0.0;  // min signed distance over all (j, k)
};

struct ScpResult {
  ScpStatus status = ScpStatus::MaxIterations;
  std::vector<Eigen::VectorXd> states;    // nominal trajectory, N+1 entries
  std::vector<Eigen::VectorXd> controls;  // N entries
  int iterations = 0;
  double cost = 0.0;
  std::vector<ScpIterationInfo> history;
  std::vector<geometry::AxisAlignedBox> reach_boxes;  // final tube, N+1 entries
  AuditReport audit;
};

/// Sequential convex programming on the reachability-tightened problem:
/// per iteration, a sampling-based reach tube around the candidate controls
/// tightens bounds / goal / obstacle constraints, dynamics are linearized
/// around the reference, and the resulting QP is solved under a trust region.
/// Two consecutive infeasible subproblems abort with InfeasibleSubproblem.
ScpResult scp_solve(const OcpSpec& spec,
                    const std::vector<Eigen::VectorXd>& initial_states = {},
                    const std::vector<Eigen::VectorXd>& initial_controls = {});

/// Straight-line state interpolation toward the goal-box center, the default
/// initial guess.
std::vector<Eigen::VectorXd> straight_line_init(const OcpSpec& spec);

/// A-posteriori particle audit: a fresh sampling run around the solution
/// controls, checked against the original (untightened) constraints.
AuditReport audit_solution(const OcpSpec& spec, const std::vector<Eigen::VectorXd>& controls);

}  // namespace reachkit::planner
