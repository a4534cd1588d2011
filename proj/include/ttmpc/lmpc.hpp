#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "ttmpc/angles.hpp"
#include "ttmpc/error_model.hpp"
#include "ttmpc/qp_solver.hpp"

namespace ttmpc {

/// Receding-horizon controller configuration. Magnitude bounds apply to the
/// error input u_e, rate bounds to its per-second increments (converted to
/// per-step via the sampling period).
struct MpcConfig {
  int prediction_horizon = 8;
  int control_horizon = 3;
  double ts = 0.2;
  Vec7 q_diag = (Vec7() << 1, 1, 0, 1, 1, 0, 0).finished();
  Vec3 r_diag = Vec3::Ones();
  Vec3 u_mag_bound = (Vec3() << 12.0 * kPi / 180.0, 6.0 * kPi / 180.0, 0.10).finished();
  Vec3 du_rate_bound = (Vec3() << 55.0 * kPi / 180.0, 35.0 * kPi / 180.0, 0.30).finished();
  bool stagewise_model = false;  ///< per-stage LTV prediction instead of frozen matrices

  void validate() const;
};

/// Controller memory carried between steps: the previously applied error
/// input and the previous increment sequence used for warm starting.
struct MpcState {
  ErrorInput u_prev{};
  Eigen::VectorXd warm_delta;
  int consecutive_failures = 0;
};

struct MpcDiagnostics {
  double solve_ms = 0.0;  ///< wall time of condensing plus QP solve
  int qp_iterations = 0;
  int active_set_size = 0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  bool qp_failed = false;
};

/// Thrown when the QP fails more than three consecutive steps.
struct ControllerAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Condensed QP over the stacked input increments dU (length 3*N_c):
/// predicted states are eliminated through the discrete error model with the
/// input held at u_e(k+N_c-1) beyond the control horizon. Rate bounds become
/// box constraints on dU; magnitude bounds become general rows over the
/// partial sums of dU added to u_e(k-1). Channels whose magnitude bound is
/// zero are pinned (zero-width boxes).
/// `models` holds either one frozen model or at least N_p per-stage models.
QpProblem build_condensed_qp(const ErrorState& z_e,
                             const std::vector<LtvDiscrete>& models,
                             const MpcConfig& cfg, const MpcState& state);

QpProblem build_condensed_qp(const ErrorState& z_e, const LtvDiscrete& model,
                             const MpcConfig& cfg, const MpcState& state);

/// One receding-horizon step: solve the condensed QP warm-started with the
/// shifted previous solution, apply u_e(k) = du*(k) + u_e(k-1), update the
/// controller memory and return u_e(k) as the feedback action u_b. On QP
/// failure the previous input is held and the step flagged; more than three
/// consecutive failures abort via ControllerAbort.
std::pair<ErrorInput, MpcDiagnostics> mpc_step(const ErrorState& z_e,
                                               const std::vector<LtvDiscrete>& models,
                                               const MpcConfig& cfg, MpcState& state);

std::pair<ErrorInput, MpcDiagnostics> mpc_step(const ErrorState& z_e,
                                               const LtvDiscrete& model,
                                               const MpcConfig& cfg, MpcState& state);

}  // namespace ttmpc
