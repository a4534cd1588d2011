#pragma once

#include <Eigen/Core>

namespace ttmpc {

using Vec3 = Eigen::Matrix<double, 3, 1>;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Vec7 = Eigen::Matrix<double, 7, 1>;

/// Geometric and actuator parameters of the tractor-trailer system.
/// Defaults are the identified values of the experimental vehicle.
struct VehicleParams {
  double tractor_wheelbase = 1.4;    ///< front axle to rear axle of the tractor [m]
  double trailer_length = 1.3;       ///< rear joint to rear axle of the trailer [m]
  double drawbar_length = 1.1;       ///< tractor rear axle to rear joint [m]
  double speed_time_constant = 2.05; ///< first-order speed model time constant [s]
  double speed_gain = 1.4;           ///< steady-state speed per unit hydrostat position [m/s]

  /// Throws std::invalid_argument unless all parameters are strictly positive.
  void validate() const;
};

/// Seven-state plant vector: tractor pose, trailer pose, longitudinal speed.
/// Yaw angles are stored unwrapped; wrap only when forming angle differences.
struct VehicleState {
  double x_t = 0.0;
  double y_t = 0.0;
  double psi_t = 0.0;
  double x_i = 0.0;
  double y_i = 0.0;
  double psi_i = 0.0;
  double v = 0.0;

  Vec7 to_vector() const;
  static VehicleState from_vector(const Vec7& z);
};

/// Three control inputs: tractor steering angle, tractor-trailer relative
/// angle, hydrostat position (fraction of full range, [0, 1]).
struct ControlInput {
  double delta_t = 0.0;
  double lambda = 0.0;
  double hp = 0.0;

  Vec3 to_vector() const;
  static ControlInput from_vector(const Vec3& u);
};

/// Hitch decomposition of the relative angle: lambda = beta + delta_i.
struct HitchAngles {
  double beta = 0.0;     ///< tractor-to-drawbar angle [rad]
  double delta_i = 0.0;  ///< trailer steering angle [rad]

  double lambda() const { return beta + delta_i; }
};

/// Continuous-time kinematic tricycle model of the tractor-trailer system.
/// Returns the 7-vector time derivative of the state.
/// Throws std::domain_error when the steering angle is at or near +-pi/2.
Vec7 dynamics_rhs(const VehicleState& state, const ControlInput& input,
                  const VehicleParams& params);

/// Classical RK4 step of a generic 7-state right-hand side.
template <class Rhs>
Vec7 rk4_step(Rhs&& rhs, const Vec7& z, double dt) {
  const Vec7 k1 = rhs(z);
  const Vec7 k2 = rhs(Vec7(z + 0.5 * dt * k1));
  const Vec7 k3 = rhs(Vec7(z + 0.5 * dt * k2));
  const Vec7 k4 = rhs(Vec7(z + dt * k3));
  return z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// One RK4 step of the plant with the input held constant over dt.
/// dt == 0 returns the state unchanged.
VehicleState step_rk4(const VehicleState& state, const ControlInput& input,
                      const VehicleParams& params, double dt);

/// Measured outputs: tractor position, trailer position, speed.
Vec5 output_map(const VehicleState& state);

/// Trailer steering angle from the relative angle and drawbar angle,
/// delta_i = lambda - beta.
double split_relative_angle(double lambda, double beta);

}  // namespace ttmpc
