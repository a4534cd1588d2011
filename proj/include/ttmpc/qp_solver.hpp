#pragma once

#include <Eigen/Core>
#include <optional>

namespace ttmpc {

/// Strictly convex quadratic program
///   min 0.5 x'Hx + g'x   s.t.  lower <= x <= upper,  G x <= h.
/// H must be symmetric positive definite. Components with
/// lower == upper are treated as equality clamps and eliminated.
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::MatrixXd G;  ///< general inequality rows, may have zero rows
  Eigen::VectorXd h;

  Eigen::Index n() const { return g.size(); }
  Eigen::Index m() const { return h.size(); }
};

enum class QpStatus { kOptimal, kMaxIter, kInfeasible };

struct QpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  QpStatus status = QpStatus::kMaxIter;
  double kkt_residual = 0.0;
  int active_set_size = 0;
};

struct QpOptions {
  double tol = 1e-8;
  int max_iter = 200;
};

/// Primal active-set solver. Deterministic: constraints are scanned in a
/// fixed order and ties are broken toward the lowest constraint index, so
/// identical inputs produce identical outputs regardless of warm start.
/// Throws std::invalid_argument on structural errors (non-PD Hessian,
/// inconsistent dimensions, lower > upper).
QpSolution solve_qp(const QpProblem& p,
                    const std::optional<Eigen::VectorXd>& warm_start = std::nullopt,
                    const QpOptions& opts = {});

/// Max-norm KKT residual of a candidate point: stationarity measured through
/// the projected natural map on the box (with least-squares multipliers for
/// active general rows), plus primal violation and complementarity.
double kkt_residual(const QpProblem& p, const Eigen::VectorXd& x);

}  // namespace ttmpc
