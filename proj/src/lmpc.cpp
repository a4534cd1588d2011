#include "ttmpc/lmpc.hpp"

#include <chrono>
#include <cmath>

#include "ttmpc/angles.hpp"

namespace ttmpc {

namespace {

constexpr int kNu = 3;
constexpr int kNx = 7;

const LtvDiscrete& stage_model(const std::vector<LtvDiscrete>& models, int i) {
  return models.size() == 1 ? models.front() : models[static_cast<size_t>(i)];
}

}  // namespace

void MpcConfig::validate() const {
  if (prediction_horizon < 1 || control_horizon < 1 ||
      control_horizon > prediction_horizon) {
    throw std::invalid_argument("mpc: horizons must satisfy 1 <= N_c <= N_p");
  }
  if (ts <= 0.0) {
    throw std::invalid_argument("mpc: sampling period must be positive");
  }
  if ((r_diag.array() <= 0.0).any()) {
    throw std::invalid_argument("mpc: R must be positive definite");
  }
  if ((q_diag.array() < 0.0).any()) {
    throw std::invalid_argument("mpc: Q must be positive semidefinite");
  }
  if ((u_mag_bound.array() < 0.0).any() || (du_rate_bound.array() <= 0.0).any()) {
    throw std::invalid_argument("mpc: invalid input bounds");
  }
}

QpProblem build_condensed_qp(const ErrorState& z_e,
                             const std::vector<LtvDiscrete>& models,
                             const MpcConfig& cfg, const MpcState& state) {
  cfg.validate();
  const int np = cfg.prediction_horizon;
  const int nc = cfg.control_horizon;
  if (models.empty() || (models.size() != 1 && static_cast<int>(models.size()) < np)) {
    throw std::invalid_argument("mpc: need one frozen model or N_p stage models");
  }
  for (const LtvDiscrete& m : models) {
    if (std::abs(m.ts - cfg.ts) > 1e-12) {
      throw std::invalid_argument("mpc: model sampling period differs from config");
    }
  }

  const int nv = kNu * nc;
  const Vec3 u_prev = state.u_prev.to_vector();

  // Forward recursion: z(i+1) = A_i z(i) + B_i u(i), with
  // u(i) = u_prev + sum_{j <= min(i, nc-1)} du_j.
  Eigen::MatrixXd gamma(kNx * np, nv);
  Eigen::VectorXd free_resp(kNx * np);
  Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(kNx, nv);
  Vec7 f = z_e.to_vector();
  for (int i = 0; i < np; ++i) {
    const LtvDiscrete& m = stage_model(models, i);
    coeff = (m.A_d * coeff).eval();
    const int active_blocks = std::min(i, nc - 1);
    for (int j = 0; j <= active_blocks; ++j) {
      coeff.middleCols<kNu>(kNu * j) += m.B_d;
    }
    f = m.A_d * f + m.B_d * u_prev;
    gamma.middleRows<kNx>(kNx * i) = coeff;
    free_resp.segment<kNx>(kNx * i) = f;
  }

  // Stage weights: Q on every predicted state, R on every increment.
  Eigen::VectorXd q_stack(kNx * np);
  for (int i = 0; i < np; ++i) q_stack.segment<kNx>(kNx * i) = cfg.q_diag;
  const Eigen::MatrixXd gamma_q = q_stack.asDiagonal() * gamma;

  QpProblem qp;
  qp.H = 2.0 * (gamma.transpose() * gamma_q);
  for (int j = 0; j < nc; ++j) {
    qp.H.block<kNu, kNu>(kNu * j, kNu * j) += 2.0 * cfg.r_diag.asDiagonal().toDenseMatrix();
  }
  qp.H = 0.5 * (qp.H + qp.H.transpose()).eval();
  qp.g = 2.0 * (gamma_q.transpose() * free_resp);

  // Rate bounds as boxes; pinned channels collapse to zero-width boxes.
  qp.lower.resize(nv);
  qp.upper.resize(nv);
  for (int j = 0; j < nc; ++j) {
    for (int c = 0; c < kNu; ++c) {
      const bool pinned = cfg.u_mag_bound(c) == 0.0;
      const double r = pinned ? 0.0 : cfg.du_rate_bound(c) * cfg.ts;
      qp.lower(kNu * j + c) = -r;
      qp.upper(kNu * j + c) = r;
    }
  }

  // Magnitude bounds on the accumulated inputs as general rows.
  int n_rows = 0;
  for (int c = 0; c < kNu; ++c) {
    if (cfg.u_mag_bound(c) > 0.0) n_rows += 2 * nc;
  }
  qp.G = Eigen::MatrixXd::Zero(n_rows, nv);
  qp.h.resize(n_rows);
  int row = 0;
  for (int i = 0; i < nc; ++i) {
    for (int c = 0; c < kNu; ++c) {
      if (cfg.u_mag_bound(c) == 0.0) {
        if (std::abs(u_prev(c)) > 1e-12) {
          throw std::logic_error("mpc: pinned channel has nonzero previous input");
        }
        continue;
      }
      for (int j = 0; j <= i; ++j) {
        qp.G(row, kNu * j + c) = 1.0;
        qp.G(row + 1, kNu * j + c) = -1.0;
      }
      qp.h(row) = cfg.u_mag_bound(c) - u_prev(c);
      qp.h(row + 1) = cfg.u_mag_bound(c) + u_prev(c);
      row += 2;
    }
  }
  return qp;
}

QpProblem build_condensed_qp(const ErrorState& z_e, const LtvDiscrete& model,
                             const MpcConfig& cfg, const MpcState& state) {
  return build_condensed_qp(z_e, std::vector<LtvDiscrete>{model}, cfg, state);
}

std::pair<ErrorInput, MpcDiagnostics> mpc_step(const ErrorState& z_e,
                                               const std::vector<LtvDiscrete>& models,
                                               const MpcConfig& cfg, MpcState& state) {
  cfg.validate();
  const int nv = kNu * cfg.control_horizon;
  MpcDiagnostics diag;

  const auto t0 = std::chrono::steady_clock::now();
  bool solved = false;
  Eigen::VectorXd delta;
  try {
    const QpProblem qp = build_condensed_qp(z_e, models, cfg, state);

    std::optional<Eigen::VectorXd> warm;
    if (state.warm_delta.size() == nv) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(nv);
      w.head(nv - kNu) = state.warm_delta.tail(nv - kNu);
      warm = w;
    }

    const QpSolution sol = solve_qp(qp, warm);
    diag.qp_iterations = sol.iterations;
    diag.active_set_size = sol.active_set_size;
    diag.objective = sol.objective;
    diag.kkt_residual = sol.kkt_residual;
    if (sol.status == QpStatus::kOptimal) {
      solved = true;
      delta = sol.x;
    }
  } catch (const std::exception&) {
    solved = false;
  }
  const auto t1 = std::chrono::steady_clock::now();
  diag.solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  ErrorInput u_e = state.u_prev;
  if (solved) {
    u_e = ErrorInput::from_vector(state.u_prev.to_vector() + delta.head<kNu>());
    state.u_prev = u_e;
    state.warm_delta = delta;
    state.consecutive_failures = 0;
  } else {
    diag.qp_failed = true;
    state.consecutive_failures += 1;
    if (state.consecutive_failures > 3) {
      throw ControllerAbort("mpc: QP failed more than three consecutive steps");
    }
  }
  return {u_e, diag};
}

std::pair<ErrorInput, MpcDiagnostics> mpc_step(const ErrorState& z_e,
                                               const LtvDiscrete& model,
                                               const MpcConfig& cfg, MpcState& state) {
  return mpc_step(z_e, std::vector<LtvDiscrete>{model}, cfg, state);
}

}  // namespace ttmpc
