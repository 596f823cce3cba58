#include "reachkit/planner/qp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace reachkit::planner {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Stacked {
  Eigen::MatrixXd a;  // [G; A]
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  int rows() const { return static_cast<int>(a.rows()); }
};

Stacked stack_constraints(const QpProblem& qp) {
  const int gi = static_cast<int>(qp.g.rows());
  const int ae = static_cast<int>(qp.a.rows());
  Stacked s;
  s.a.resize(gi + ae, qp.vars());
  s.lo.resize(gi + ae);
  s.hi.resize(gi + ae);
  if (gi > 0) {
    s.a.topRows(gi) = qp.g;
    s.lo.head(gi).setConstant(-kInf);
    s.hi.head(gi) = qp.h;
  }
  if (ae > 0) {
    s.a.bottomRows(ae) = qp.a;
    s.lo.tail(ae) = qp.b;
    s.hi.tail(ae) = qp.b;
  }
  return s;
}

}  // namespace

std::string to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Solved:
      return "solved";
    case QpStatus::MaxIterations:
      return "max_iter";
    case QpStatus::PrimalInfeasible:
      return "primal_infeasible";
  }
  return "unknown";
}

QpResult solve_qp(const QpProblem& qp, double tol, int max_iterations) {
  QpSettings s;
  s.tol = tol;
  s.max_iterations = max_iterations;
  return solve_qp(qp, s);
}

QpResult solve_qp(const QpProblem& qp, const QpSettings& settings) {
  const int n = qp.vars();
  if (qp.p.rows() != n || qp.p.cols() != n) throw std::invalid_argument("solve_qp: bad P shape");
  if ((qp.g.rows() > 0 && qp.g.cols() != n) || (qp.a.rows() > 0 && qp.a.cols() != n)) {
    throw std::invalid_argument("solve_qp: constraint column mismatch");
  }
  {
    // P must be (numerically) PSD; a Cholesky of P + small shift certifies it.
    const double shift = 1e-9 * std::max(1.0, qp.p.cwiseAbs().maxCoeff());
    Eigen::LLT<Eigen::MatrixXd> llt(qp.p + shift * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() != Eigen::Success) throw std::invalid_argument("solve_qp: P is not PSD");
  }

  Stacked st = stack_constraints(qp);
  const int mrows = st.rows();
  if (mrows == 0) {
    // Unconstrained minimum.
    QpResult res;
    const double shift = 1e-12 * std::max(1.0, qp.p.cwiseAbs().maxCoeff());
    res.x = (qp.p + shift * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(-qp.q);
    res.status = QpStatus::Solved;
    return res;
  }

  // Ruiz equilibration of [[P, A^T], [A, 0]]: diagonal D (variables) and
  // E (constraints) driving row/col infinity norms toward 1.
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd e = Eigen::VectorXd::Ones(mrows);
  Eigen::MatrixXd ps = qp.p;
  Eigen::MatrixXd as = st.a;
  for (int it = 0; it < settings.ruiz_iterations; ++it) {
    Eigen::VectorXd col_norm(n);
    for (int j = 0; j < n; ++j) {
      double nrm = std::max(ps.col(j).cwiseAbs().maxCoeff(), as.col(j).cwiseAbs().maxCoeff());
      col_norm(j) = nrm > 1e-12 ? 1.0 / std::sqrt(nrm) : 1.0;
    }
    Eigen::VectorXd row_norm(mrows);
    for (int i = 0; i < mrows; ++i) {
      double nrm = as.row(i).cwiseAbs().maxCoeff();
      row_norm(i) = nrm > 1e-12 ? 1.0 / std::sqrt(nrm) : 1.0;
    }
    ps = col_norm.asDiagonal() * ps * col_norm.asDiagonal();
    as = row_norm.asDiagonal() * as * col_norm.asDiagonal();
    d = d.cwiseProduct(col_norm);
    e = e.cwiseProduct(row_norm);
  }
  Eigen::VectorXd qs = d.cwiseProduct(qp.q);
  Eigen::VectorXd los = e.cwiseProduct(st.lo);
  Eigen::VectorXd his = e.cwiseProduct(st.hi);
  for (int i = 0; i < mrows; ++i) {
    if (st.lo(i) == -kInf) los(i) = -kInf;
    if (st.hi(i) == kInf) his(i) = kInf;
  }

  const Eigen::VectorXd eq_mask =
      ((st.hi - st.lo).array() < 1e-14).select(Eigen::VectorXd::Ones(mrows),
                                               Eigen::VectorXd::Zero(mrows));

  double rho_bar = settings.rho0;
  auto rho_vec = [&](double rb) {
    Eigen::VectorXd r(mrows);
    for (int i = 0; i < mrows; ++i) r(i) = eq_mask(i) > 0.5 ? 1e3 * rb : rb;
    return r;
  };
  Eigen::VectorXd rho = rho_vec(rho_bar);

  Eigen::LDLT<Eigen::MatrixXd> kkt;
  auto refactor = [&]() {
    Eigen::MatrixXd k = ps + settings.sigma * Eigen::MatrixXd::Identity(n, n) +
                        as.transpose() * rho.asDiagonal() * as;
    kkt.compute(k);
    if (kkt.info() != Eigen::Success) throw std::runtime_error("solve_qp: KKT factorization failed");
  };
  refactor();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(mrows);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(mrows);

  QpResult res;
  Eigen::VectorXd y_prev = y;
  for (int it = 1; it <= settings.max_iterations; ++it) {
    const Eigen::VectorXd rhs =
        settings.sigma * x - qs + as.transpose() * (rho.cwiseProduct(z) - y);
    const Eigen::VectorXd x_tilde = kkt.solve(rhs);
    const Eigen::VectorXd z_tilde = as * x_tilde;

    const Eigen::VectorXd x_next = settings.alpha * x_tilde + (1.0 - settings.alpha) * x;
    const Eigen::VectorXd z_relax = settings.alpha * z_tilde + (1.0 - settings.alpha) * z;
    const Eigen::VectorXd z_next =
        (z_relax + rho.cwiseInverse().cwiseProduct(y)).cwiseMax(los).cwiseMin(his);
    y_prev = y;
    y = y + rho.cwiseProduct(z_relax - z_next);
    x = x_next;
    z = z_next;

    if (it % 10 == 0 || it == settings.max_iterations) {
      // Residuals in the original (unscaled) problem.
      const Eigen::VectorXd xu = d.cwiseProduct(x);
      const Eigen::VectorXd zu = z.cwiseQuotient(e);
      const Eigen::VectorXd yu = e.cwiseProduct(y);
      const Eigen::VectorXd ax = st.a * xu;
      const double rp = (ax - zu).cwiseAbs().maxCoeff();
      const double rd =
          (qp.p * xu + qp.q + st.a.transpose() * yu).cwiseAbs().maxCoeff();
      const double rp_scale = std::max({ax.cwiseAbs().maxCoeff(), zu.cwiseAbs().maxCoeff(), 1.0});
      const double rd_scale =
          std::max({(qp.p * xu).cwiseAbs().maxCoeff(), qp.q.cwiseAbs().maxCoeff(),
                    (st.a.transpose() * yu).cwiseAbs().maxCoeff(), 1.0});
      res.primal_residual = rp;
      res.dual_residual = rd;
      if (rp <= settings.tol * rp_scale && rd <= settings.tol * rd_scale) {
        res.x = xu;
        res.dual = yu;
        res.status = QpStatus::Solved;
        res.iterations = it;
        return res;
      }

      // Primal infeasibility certificate from the dual direction.
      const Eigen::VectorXd dy = e.cwiseProduct(y - y_prev);
      const double dy_norm = dy.cwiseAbs().maxCoeff();
      if (dy_norm > 1e-12) {
        const double eps = 1e-8 * dy_norm;
        bool unbounded_side = false;
        double support = 0.0;
        for (int i = 0; i < mrows; ++i) {
          if (dy(i) > eps) {
            if (st.hi(i) == kInf) {
              unbounded_side = true;
              break;
            }
            support += st.hi(i) * dy(i);
          } else if (dy(i) < -eps) {
            if (st.lo(i) == -kInf) {
              unbounded_side = true;
              break;
            }
            support += st.lo(i) * dy(i);
          }
        }
        const double at_dy = (st.a.transpose() * dy).cwiseAbs().maxCoeff();
        if (!unbounded_side && at_dy <= 1e-6 * dy_norm && support < -1e-8 * dy_norm) {
          res.status = QpStatus::PrimalInfeasible;
          res.iterations = it;
          return res;
        }
      }

      // Residual balancing.
      if (it % settings.adapt_interval == 0) {
        const double ratio = std::sqrt((rp / rp_scale + 1e-18) / (rd / rd_scale + 1e-18));
        const double new_rho = std::clamp(rho_bar * ratio, 1e-6, 1e6);
        if (new_rho > 5.0 * rho_bar || new_rho < rho_bar / 5.0) {
          rho_bar = new_rho;
          rho = rho_vec(rho_bar);
          refactor();
        }
      }
    }
  }

  res.x = d.cwiseProduct(x);
  res.dual = e.cwiseProduct(y);
  res.status = QpStatus::MaxIterations;
  res.iterations = settings.max_iterations;
  return res;
}

}  // namespace reachkit::planner
