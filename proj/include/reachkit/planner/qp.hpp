#pragma once

#include <Eigen/Dense>
#include <string>

namespace reachkit::planner {

/// Convex quadratic program
///   min 0.5 x^T P x + q^T x   s.t.  G x <= h,  A x = b
/// with P positive semidefinite.
struct QpProblem {
  Eigen::MatrixXd p;
  Eigen::VectorXd q;
  Eigen::MatrixXd g;
  Eigen::VectorXd h;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;

  int vars() const { return static_cast<int>(q.size()); }
};

enum class QpStatus { Solved, MaxIterations, PrimalInfeasible };

std::string to_string(QpStatus s);

struct QpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd dual;  // multipliers for [G; A] rows
  QpStatus status = QpStatus::MaxIterations;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

struct QpSettings {
  double tol = 1e-6;
  int max_iterations = 20000;
  double sigma = 1e-6;   // proximal regularization
  double alpha = 1.6;    // over-relaxation
  double rho0 = 0.1;     // initial penalty; equality rows get 1e3x
  int ruiz_iterations = 10;
  int adapt_interval = 50;  // residual-balancing penalty updates
};

/// Operator-splitting (ADMM) solver with Ruiz diagonal preconditioning and
/// residual-balancing penalty adaptation. Detects primal infeasibility via
/// the standard dual-direction certificate.
QpResult solve_qp(const QpProblem& qp, const QpSettings& settings = {});
QpResult solve_qp(const QpProblem& qp, double tol, int max_iterations);

}  // namespace reachkit::planner
