#pragma once

#include <Eigen/Core>

#include "ttmpc/trajectory.hpp"
#include "ttmpc/vehicle_model.hpp"

namespace ttmpc {

/// Tracking error expressed in the tractor/trailer body frames,
/// reference-minus-actual. Zero exactly when the state is on the reference.
struct ErrorState {
  double x_t_e = 0.0;
  double y_t_e = 0.0;
  double psi_t_e = 0.0;
  double x_i_e = 0.0;
  double y_i_e = 0.0;
  double psi_i_e = 0.0;
  double v_e = 0.0;

  Vec7 to_vector() const;
  static ErrorState from_vector(const Vec7& z);
};

/// Error input, reference-minus-actual: (delta_t_e, lambda_e, hp_e).
struct ErrorInput {
  double delta_t_e = 0.0;
  double lambda_e = 0.0;
  double hp_e = 0.0;

  Vec3 to_vector() const;
  static ErrorInput from_vector(const Vec3& u);
};

/// Continuous-time linear error model evaluated at a reference sample.
struct LtvContinuous {
  Eigen::Matrix<double, 7, 7> A;
  Eigen::Matrix<double, 7, 3> B;
};

/// Zero-order-hold discretization of the linear error model.
struct LtvDiscrete {
  Eigen::Matrix<double, 7, 7> A_d;
  Eigen::Matrix<double, 7, 3> B_d;
  double ts = 0.0;
};

/// Rotates the inertial-frame state difference z_r - z into the body frames
/// (planar rotation by the actual yaw on each position pair, identity on the
/// remaining channels). Yaw differences are wrapped to (-pi, pi].
ErrorState to_error_frame(const VehicleState& z_r, const VehicleState& z);

/// Nonlinear error dynamics: time derivative of the error state given the
/// actual input u and the actual body yaw rates. The actual speed is
/// recovered as v = v_r - v_e. Throws on steering at or near +-pi/2.
Vec7 error_dynamics_nonlinear(const ErrorState& z_e, const ControlInput& u,
                              const ReferenceSample& ref, double gamma_t,
                              double gamma_i, const VehicleParams& params);

/// Linear error model about the reference: A couples the position errors
/// through the reference yaw rates and speed, B maps the error inputs
/// through the small-steering-angle kinematics.
LtvContinuous linearize_about_reference(const ReferenceSample& ref,
                                        const VehicleParams& params);

/// Exact zero-order-hold discretization via the matrix exponential of the
/// augmented [[A, B], [0, 0]] block. ts == 0 yields A_d = I, B_d = 0.
LtvDiscrete discretize_zoh(const LtvContinuous& cont, double ts);

}  // namespace ttmpc
