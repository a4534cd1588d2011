#include "ttmpc/vehicle_model.hpp"

#include <cmath>
#include <stdexcept>

#include "ttmpc/angles.hpp"

namespace ttmpc {

namespace {

constexpr double kSteeringSingularityMargin = 1e-6;

void check_steering(double delta_t) {
  if (!(std::abs(delta_t) < kPi / 2.0 - kSteeringSingularityMargin)) {
    throw std::domain_error("tractor steering angle at or near +-pi/2");
  }
}

}  // namespace

void VehicleParams::validate() const {
  const bool ok = tractor_wheelbase > 0.0 && trailer_length > 0.0 &&
                  drawbar_length > 0.0 && speed_time_constant > 0.0 &&
                  speed_gain > 0.0;
  if (!ok) {
    throw std::invalid_argument("vehicle parameters must be strictly positive");
  }
}

Vec7 VehicleState::to_vector() const {
  Vec7 z;
  z << x_t, y_t, psi_t, x_i, y_i, psi_i, v;
  return z;
}

VehicleState VehicleState::from_vector(const Vec7& z) {
  return VehicleState{z(0), z(1), z(2), z(3), z(4), z(5), z(6)};
}

Vec3 ControlInput::to_vector() const {
  Vec3 u;
  u << delta_t, lambda, hp;
  return u;
}

ControlInput ControlInput::from_vector(const Vec3& u) {
  return ControlInput{u(0), u(1), u(2)};
}

Vec7 dynamics_rhs(const VehicleState& state, const ControlInput& input,
                  const VehicleParams& params) {
  check_steering(input.delta_t);

  const double tan_delta = std::tan(input.delta_t);
  Vec7 dz;
  dz(0) = state.v * std::cos(state.psi_t);
  dz(1) = state.v * std::sin(state.psi_t);
  dz(2) = state.v * tan_delta / params.tractor_wheelbase;
  dz(3) = state.v * std::cos(state.psi_i);
  dz(4) = state.v * std::sin(state.psi_i);
  dz(5) = state.v / params.trailer_length *
          (std::sin(input.lambda) +
           params.drawbar_length / params.tractor_wheelbase * tan_delta *
               std::cos(input.lambda));
  dz(6) = -state.v / params.speed_time_constant +
          params.speed_gain / params.speed_time_constant * input.hp;
  return dz;
}

VehicleState step_rk4(const VehicleState& state, const ControlInput& input,
                      const VehicleParams& params, double dt) {
  if (dt < 0.0) {
    throw std::invalid_argument("integration step must be nonnegative");
  }
  if (dt == 0.0) {
    return state;
  }
  const auto rhs = [&](const Vec7& z) {
    return dynamics_rhs(VehicleState::from_vector(z), input, params);
  };
  return VehicleState::from_vector(rk4_step(rhs, state.to_vector(), dt));
}

Vec5 output_map(const VehicleState& state) {
  Vec5 y;
  y << state.x_t, state.y_t, state.x_i, state.y_i, state.v;
  return y;
}

double split_relative_angle(double lambda, double beta) { return lambda - beta; }

}  // namespace ttmpc
