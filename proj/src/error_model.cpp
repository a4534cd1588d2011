#include "ttmpc/error_model.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "ttmpc/angles.hpp"

namespace ttmpc {

namespace {

void check_steering(double delta_t) {
  if (!(std::abs(delta_t) < kPi / 2.0 - 1e-6)) {
    throw std::domain_error("steering angle at or near +-pi/2");
  }
}

}  // namespace

Vec7 ErrorState::to_vector() const {
  Vec7 z;
  z << x_t_e, y_t_e, psi_t_e, x_i_e, y_i_e, psi_i_e, v_e;
  return z;
}

ErrorState ErrorState::from_vector(const Vec7& z) {
  return ErrorState{z(0), z(1), z(2), z(3), z(4), z(5), z(6)};
}

Vec3 ErrorInput::to_vector() const {
  Vec3 u;
  u << delta_t_e, lambda_e, hp_e;
  return u;
}

ErrorInput ErrorInput::from_vector(const Vec3& u) {
  return ErrorInput{u(0), u(1), u(2)};
}

ErrorState to_error_frame(const VehicleState& z_r, const VehicleState& z) {
  const double ct = std::cos(z.psi_t);
  const double st = std::sin(z.psi_t);
  const double ci = std::cos(z.psi_i);
  const double si = std::sin(z.psi_i);

  ErrorState e;
  e.x_t_e = ct * (z_r.x_t - z.x_t) + st * (z_r.y_t - z.y_t);
  e.y_t_e = -st * (z_r.x_t - z.x_t) + ct * (z_r.y_t - z.y_t);
  e.psi_t_e = wrap_to_pi(z_r.psi_t - z.psi_t);
  e.x_i_e = ci * (z_r.x_i - z.x_i) + si * (z_r.y_i - z.y_i);
  e.y_i_e = -si * (z_r.x_i - z.x_i) + ci * (z_r.y_i - z.y_i);
  e.psi_i_e = wrap_to_pi(z_r.psi_i - z.psi_i);
  e.v_e = z_r.v - z.v;
  return e;
}

Vec7 error_dynamics_nonlinear(const ErrorState& z_e, const ControlInput& u,
                              const ReferenceSample& ref, double gamma_t,
                              double gamma_i, const VehicleParams& params) {
  check_steering(u.delta_t);
  check_steering(ref.u_r.delta_t);

  const double v = ref.v_r - z_e.v_e;
  const double lt = params.tractor_wheelbase;
  const double li = params.trailer_length;
  const double ld = params.drawbar_length;
  const double tau = params.speed_time_constant;

  Vec7 dz;
  dz(0) = gamma_t * z_e.y_t_e - v + ref.v_r * std::cos(z_e.psi_t_e);
  dz(1) = -gamma_t * z_e.x_t_e + ref.v_r * std::sin(z_e.psi_t_e);
  dz(2) = (ref.v_r * std::tan(ref.u_r.delta_t) - v * std::tan(u.delta_t)) / lt;
  dz(3) = gamma_i * z_e.y_i_e - v + ref.v_r * std::cos(z_e.psi_i_e);
  dz(4) = -gamma_i * z_e.x_i_e + ref.v_r * std::sin(z_e.psi_i_e);
  dz(5) = ref.v_r / li *
              (std::sin(ref.u_r.lambda) +
               ld / lt * std::tan(ref.u_r.delta_t) * std::cos(ref.u_r.lambda)) -
          v / li * (std::sin(u.lambda) + ld / lt * std::tan(u.delta_t) * std::cos(u.lambda));
  dz(6) = -z_e.v_e / tau + params.speed_gain / tau * (ref.u_r.hp - u.hp);
  return dz;
}

LtvContinuous linearize_about_reference(const ReferenceSample& ref,
                                        const VehicleParams& params) {
  LtvContinuous m;
  m.A.setZero();
  m.B.setZero();

  m.A(0, 1) = ref.gamma_t_r;
  m.A(0, 6) = 1.0;
  m.A(1, 0) = -ref.gamma_t_r;
  m.A(1, 2) = ref.v_r;
  m.A(3, 4) = ref.gamma_i_r;
  m.A(3, 6) = 1.0;
  m.A(4, 3) = -ref.gamma_i_r;
  m.A(4, 5) = ref.v_r;
  m.A(6, 6) = -1.0 / params.speed_time_constant;

  m.B(2, 0) = ref.v_r / params.tractor_wheelbase;
  m.B(5, 0) = ref.v_r * params.drawbar_length /
              (params.tractor_wheelbase * params.trailer_length);
  m.B(5, 1) = ref.v_r / params.trailer_length;
  m.B(6, 2) = params.speed_gain / params.speed_time_constant;
  return m;
}

LtvDiscrete discretize_zoh(const LtvContinuous& cont, double ts) {
  if (ts < 0.0) {
    throw std::invalid_argument("discretize_zoh: negative sampling period");
  }
  LtvDiscrete d;
  d.ts = ts;
  if (ts == 0.0) {
    d.A_d.setIdentity();
    d.B_d.setZero();
    return d;
  }
  Eigen::Matrix<double, 10, 10> aug = Eigen::Matrix<double, 10, 10>::Zero();
  aug.topLeftCorner<7, 7>() = cont.A;
  aug.topRightCorner<7, 3>() = cont.B;
  const Eigen::Matrix<double, 10, 10> expm = (aug * ts).exp();
  d.A_d = expm.topLeftCorner<7, 7>();
  d.B_d = expm.topRightCorner<7, 3>();
  return d;
}

}  // namespace ttmpc
