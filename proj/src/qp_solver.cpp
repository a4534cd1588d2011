#include "ttmpc/qp_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ttmpc {

namespace {

constexpr double kEqualityWidth = 1e-14;
constexpr double kDirectionTiny = 1e-14;
constexpr double kMultiplierDropTol = 1e-11;

void validate_problem(const QpProblem& p) {
  const Eigen::Index n = p.n();
  if (p.H.rows() != n || p.H.cols() != n || p.lower.size() != n ||
      p.upper.size() != n || p.G.cols() != (p.m() > 0 ? n : p.G.cols()) ||
      p.G.rows() != p.m()) {
    throw std::invalid_argument("qp: inconsistent dimensions");
  }
  if ((p.H - p.H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + p.H.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("qp: Hessian is not symmetric");
  }
  if (((p.upper - p.lower).array() < -kEqualityWidth).any()) {
    throw std::invalid_argument("qp: lower bound exceeds upper bound");
  }
}

void check_positive_definite(const Eigen::MatrixXd& h_sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h_sym, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 1e-10) {
    throw std::invalid_argument("qp: Hessian is not positive definite");
  }
}

// Constraint ids: lower bound of var i -> 2i, upper bound -> 2i+1,
// general row c -> 2n + c. All scans ascend by id so ties break low.
struct ActiveSet {
  std::vector<int> box_state;   // 0 inactive, -1 at lower, +1 at upper
  std::vector<bool> row_active;

  int count() const {
    int c = 0;
    for (int s : box_state) c += (s != 0);
    for (bool a : row_active) c += a;
    return c;
  }
};

// Minimizes 0.5 ||(Gx - h)+||^2 over the box by projected gradient.
// Returns true when the max row violation drops below tol.
bool restore_feasibility(const QpProblem& p, Eigen::VectorXd& x, double tol) {
  if (p.m() == 0) return true;
  const double lipschitz = std::max(1.0, p.G.squaredNorm());
  const double step = 1.0 / lipschitz;
  for (int it = 0; it < 5000; ++it) {
    Eigen::VectorXd viol = (p.G * x - p.h).cwiseMax(0.0);
    if (viol.maxCoeff() <= tol) return true;
    x = (x - step * (p.G.transpose() * viol)).cwiseMax(p.lower).cwiseMin(p.upper);
  }
  return ((p.G * x - p.h).cwiseMax(0.0)).maxCoeff() <= tol;
}

struct EqpResult {
  Eigen::VectorXd direction;        // full-length, zero on fixed vars
  Eigen::VectorXd row_multipliers;  // one per active row
};

// Equality-constrained subproblem on the free variables:
//   min 0.5 p'Hp + q'p  s.t. p_i = 0 for box-active i, G_A p = 0.
// Solved by Schur complement on two Cholesky factorizations; the active
// rows are independent by construction so the Schur complement is PD.
EqpResult solve_eqp(const QpProblem& p, const ActiveSet& act, const Eigen::VectorXd& q) {
  const Eigen::Index n = p.n();
  std::vector<Eigen::Index> free_idx;
  free_idx.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (act.box_state[i] == 0) free_idx.push_back(i);
  }
  std::vector<Eigen::Index> rows;
  for (Eigen::Index c = 0; c < p.m(); ++c) {
    if (act.row_active[c]) rows.push_back(c);
  }

  EqpResult res;
  res.direction = Eigen::VectorXd::Zero(n);
  res.row_multipliers = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.size()));
  const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());
  if (nf == 0) return res;

  Eigen::MatrixXd h_ff(nf, nf);
  Eigen::VectorXd q_f(nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    q_f(a) = q(free_idx[a]);
    for (Eigen::Index b = 0; b < nf; ++b) {
      h_ff(a, b) = p.H(free_idx[a], free_idx[b]);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(h_ff);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("qp: free-variable Hessian factorization failed");
  }

  Eigen::VectorXd p_f;
  if (rows.empty()) {
    p_f = llt.solve(-q_f);
  } else {
    Eigen::MatrixXd g_af(static_cast<Eigen::Index>(rows.size()), nf);
    for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(rows.size()); ++r) {
      for (Eigen::Index a = 0; a < nf; ++a) {
        g_af(r, a) = p.G(rows[r], free_idx[a]);
      }
    }
    const Eigen::MatrixXd y = llt.solve(g_af.transpose());
    const Eigen::MatrixXd schur = g_af * y;
    const Eigen::VectorXd hinv_q = llt.solve(q_f);
    Eigen::LLT<Eigen::MatrixXd> schur_llt(schur);
    res.row_multipliers = schur_llt.solve(-g_af * hinv_q);
    p_f = -(hinv_q + y * res.row_multipliers);
  }
  for (Eigen::Index a = 0; a < nf; ++a) {
    res.direction(free_idx[a]) = p_f(a);
  }
  return res;
}

QpSolution solve_reduced(const QpProblem& p, const std::optional<Eigen::VectorXd>& warm,
                         const QpOptions& opts) {
  const Eigen::Index n = p.n();
  const Eigen::Index m = p.m();

  QpSolution sol;
  sol.status = QpStatus::kMaxIter;

  if (n == 0) {
    sol.x = Eigen::VectorXd::Zero(0);
    sol.status = (m == 0 || p.h.minCoeff() >= -1e-12) ? QpStatus::kOptimal
                                                      : QpStatus::kInfeasible;
    return sol;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (warm && warm->size() == n) x = *warm;
  x = x.cwiseMax(p.lower).cwiseMin(p.upper);
  if (!restore_feasibility(p, x, 1e-12)) {
    x = Eigen::VectorXd::Zero(n).cwiseMax(p.lower).cwiseMin(p.upper);
    if (!restore_feasibility(p, x, 1e-12)) {
      sol.x = x;
      sol.status = QpStatus::kInfeasible;
      sol.kkt_residual = kkt_residual(p, x);
      return sol;
    }
  }

  ActiveSet act;
  act.box_state.assign(static_cast<size_t>(n), 0);
  act.row_active.assign(static_cast<size_t>(m), false);

  const double dir_eps = 1e-12;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    sol.iterations = iter;
    const Eigen::VectorXd q = p.H * x + p.g;
    const EqpResult eqp = solve_eqp(p, act, q);

    if (eqp.direction.cwiseAbs().maxCoeff() <= dir_eps * (1.0 + x.cwiseAbs().maxCoeff())) {
      // Stationary on the working set; check multipliers, drop the most
      // negative one (lowest id on ties).
      Eigen::VectorXd r = q;
      Eigen::Index mu_pos = 0;
      for (Eigen::Index c = 0; c < m; ++c) {
        if (act.row_active[c]) r += eqp.row_multipliers(mu_pos++) * p.G.row(c).transpose();
      }
      double worst = -kMultiplierDropTol;
      int worst_id = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (act.box_state[i] == -1 && r(i) < worst) {
          worst = r(i);
          worst_id = static_cast<int>(2 * i);
        } else if (act.box_state[i] == 1 && -r(i) < worst) {
          worst = -r(i);
          worst_id = static_cast<int>(2 * i + 1);
        }
      }
      mu_pos = 0;
      for (Eigen::Index c = 0; c < m; ++c) {
        if (!act.row_active[c]) continue;
        const double mu = eqp.row_multipliers(mu_pos++);
        if (mu < worst) {
          worst = mu;
          worst_id = static_cast<int>(2 * n + c);
        }
      }
      if (worst_id < 0) {
        sol.status = QpStatus::kOptimal;
        break;
      }
      if (worst_id < 2 * n) {
        act.box_state[static_cast<size_t>(worst_id / 2)] = 0;
      } else {
        act.row_active[static_cast<size_t>(worst_id - 2 * n)] = false;
      }
      continue;
    }

    // Line search toward the EQP minimizer; the first (lowest-id) constraint
    // attaining the minimal step blocks.
    const Eigen::VectorXd& d = eqp.direction;
    double alpha = 1.0;
    int blocking_id = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (act.box_state[i] != 0) continue;
      if (d(i) > kDirectionTiny) {
        const double a = (p.upper(i) - x(i)) / d(i);
        if (a < alpha - 1e-15) {
          alpha = a;
          blocking_id = static_cast<int>(2 * i + 1);
        }
      } else if (d(i) < -kDirectionTiny) {
        const double a = (p.lower(i) - x(i)) / d(i);
        if (a < alpha - 1e-15) {
          alpha = a;
          blocking_id = static_cast<int>(2 * i);
        }
      }
    }
    for (Eigen::Index c = 0; c < m; ++c) {
      if (act.row_active[c]) continue;
      const double slope = p.G.row(c).dot(d);
      if (slope > kDirectionTiny) {
        const double a = (p.h(c) - p.G.row(c).dot(x)) / slope;
        if (a < alpha - 1e-15) {
          alpha = a;
          blocking_id = static_cast<int>(2 * n + c);
        }
      }
    }
    alpha = std::max(alpha, 0.0);
    x += alpha * d;
    if (blocking_id >= 0) {
      if (blocking_id < 2 * n) {
        const Eigen::Index i = blocking_id / 2;
        const bool at_upper = (blocking_id % 2) == 1;
        x(i) = at_upper ? p.upper(i) : p.lower(i);
        act.box_state[static_cast<size_t>(i)] = at_upper ? 1 : -1;
      } else {
        act.row_active[static_cast<size_t>(blocking_id - 2 * n)] = true;
      }
    }
  }

  sol.x = x;
  sol.objective = 0.5 * x.dot(p.H * x) + p.g.dot(x);
  sol.kkt_residual = kkt_residual(p, x);
  sol.active_set_size = act.count();
  if (sol.status == QpStatus::kMaxIter && sol.kkt_residual < opts.tol) {
    sol.status = QpStatus::kOptimal;
  }
  return sol;
}

}  // namespace

QpSolution solve_qp(const QpProblem& p, const std::optional<Eigen::VectorXd>& warm_start,
                    const QpOptions& opts) {
  validate_problem(p);
  const Eigen::MatrixXd h_sym = 0.5 * (p.H + p.H.transpose());
  check_positive_definite(h_sym);

  const Eigen::Index n = p.n();
  std::vector<Eigen::Index> free_idx;
  Eigen::VectorXd x_full = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (p.upper(i) - p.lower(i) <= kEqualityWidth) {
      x_full(i) = p.lower(i);
    } else {
      free_idx.push_back(i);
    }
  }

  const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());
  if (nf == n) {
    QpProblem ps = p;
    ps.H = h_sym;
    return solve_reduced(ps, warm_start, opts);
  }

  // Eliminate equality-clamped variables before solving.
  QpProblem r;
  r.H.resize(nf, nf);
  r.g.resize(nf);
  r.lower.resize(nf);
  r.upper.resize(nf);
  r.G.resize(p.m(), nf);
  r.h = p.h;
  for (Eigen::Index a = 0; a < nf; ++a) {
    const Eigen::Index i = free_idx[a];
    r.g(a) = p.g(i) + h_sym.row(i).dot(x_full);
    r.lower(a) = p.lower(i);
    r.upper(a) = p.upper(i);
    for (Eigen::Index b = 0; b < nf; ++b) r.H(a, b) = h_sym(i, free_idx[b]);
    for (Eigen::Index c = 0; c < p.m(); ++c) r.G(c, a) = p.G(c, i);
  }
  if (p.m() > 0) r.h -= p.G * x_full;

  std::optional<Eigen::VectorXd> warm_reduced;
  if (warm_start && warm_start->size() == n) {
    Eigen::VectorXd w(nf);
    for (Eigen::Index a = 0; a < nf; ++a) w(a) = (*warm_start)(free_idx[a]);
    warm_reduced = w;
  }

  QpSolution rsol = solve_reduced(r, warm_reduced, opts);
  QpSolution sol = rsol;
  sol.x = x_full;
  for (Eigen::Index a = 0; a < nf; ++a) sol.x(free_idx[a]) = rsol.x(a);
  sol.objective = 0.5 * sol.x.dot(h_sym * sol.x) + p.g.dot(sol.x);
  sol.kkt_residual = kkt_residual(p, sol.x);
  return sol;
}

double kkt_residual(const QpProblem& p, const Eigen::VectorXd& x) {
  const Eigen::Index n = p.n();
  const Eigen::Index m = p.m();
  if (n == 0) {
    return m > 0 ? std::max(0.0, (-p.h).maxCoeff()) : 0.0;
  }
  const Eigen::VectorXd q = p.H * x + p.g;

  std::vector<Eigen::Index> active_rows;
  for (Eigen::Index c = 0; c < m; ++c) {
    if (std::abs(p.G.row(c).dot(x) - p.h(c)) <= 1e-8 * (1.0 + std::abs(p.h(c)))) {
      active_rows.push_back(c);
    }
  }

  Eigen::VectorXd r = q;
  double complementarity = 0.0;
  if (!active_rows.empty()) {
    Eigen::MatrixXd ga(static_cast<Eigen::Index>(active_rows.size()), n);
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(active_rows.size()); ++k) {
      ga.row(k) = p.G.row(active_rows[k]);
    }
    Eigen::VectorXd mu = ga.transpose().colPivHouseholderQr().solve(-q);
    mu = mu.cwiseMax(0.0);
    r += ga.transpose() * mu;
    for (Eigen::Index k = 0; k < mu.size(); ++k) {
      complementarity = std::max(
          complementarity,
          std::abs(mu(k) * (p.G.row(active_rows[k]).dot(x) - p.h(active_rows[k]))));
    }
  }

  const Eigen::VectorXd projected = (x - r).cwiseMax(p.lower).cwiseMin(p.upper);
  const double stationarity = (x - projected).cwiseAbs().maxCoeff();

  double violation = std::max((p.lower - x).maxCoeff(), (x - p.upper).maxCoeff());
  if (m > 0) violation = std::max(violation, (p.G * x - p.h).maxCoeff());
  violation = std::max(violation, 0.0);

  return std::max({stationarity, violation, complementarity});
}

}  // namespace ttmpc
