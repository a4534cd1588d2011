#include "ttmpc/ff_robust.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ttmpc/angles.hpp"

namespace ttmpc {

namespace {

constexpr double kSteeringClamp = 35.0 * kPi / 180.0;
constexpr double kMismatchClamp = 1.0;
constexpr int kResyncSteps = 10;

double clamp_abs(double x, double bound, bool& engaged) {
  if (x > bound) {
    engaged = true;
    return bound;
  }
  if (x < -bound) {
    engaged = true;
    return -bound;
  }
  return x;
}

}  // namespace

void RobustGains::validate() const {
  if ((k_p.array() <= 0.0).any() || (k_d.array() <= 0.0).any() ||
      (k_s.array() <= 0.0).any()) {
    throw std::invalid_argument("robust gains must be strictly positive");
  }
  if ((k_d.array() <= k_p.array()).any()) {
    throw std::invalid_argument(
        "derivative gains must exceed the proportional gains");
  }
  if (derivative_filter_tau < 0.0) {
    throw std::invalid_argument("derivative filter time constant must be nonnegative");
  }
}

FeedforwardAction feedforward_action(const ReferenceSample& ref, double beta,
                                     const VehicleParams& params) {
  if (ref.v_r == 0.0) {
    throw std::domain_error("feedforward: reference speed is zero");
  }
  if (params.speed_gain == 0.0) {
    throw std::invalid_argument("feedforward: speed model gain is zero");
  }
  FeedforwardAction a;
  a.u_f.delta_t = ref.gamma_t_r * params.tractor_wheelbase / ref.v_r;
  const double lambda_r = (ref.gamma_i_r * params.trailer_length -
                           ref.gamma_t_r * params.drawbar_length) /
                          ref.v_r;
  a.u_f.lambda = lambda_r - beta;  // trailer steering reference delta_i_r
  a.u_f.hp = ref.v_r / params.speed_gain;
  a.lambda_r = lambda_r;
  return a;
}

NominalModelState propagate_nominal(const NominalModelState& nominal,
                                    const LtvDiscrete& model,
                                    const ErrorInput& u_e_applied) {
  NominalModelState next = nominal;
  next.nominal = ErrorState::from_vector(model.A_d * nominal.nominal.to_vector() +
                                         model.B_d * u_e_applied.to_vector());
  return next;
}

UncertaintyVector uncertainty_vector(const NominalModelState& nominal,
                                     const ErrorState& measured) {
  const auto clamp = [](double x) {
    return std::clamp(x, -kMismatchClamp, kMismatchClamp);
  };
  UncertaintyVector m;
  m.x_t_m = clamp(measured.x_t_e - nominal.nominal.x_t_e);
  m.y_t_m = clamp(measured.y_t_e - nominal.nominal.y_t_e);
  m.x_i_m = clamp(measured.x_i_e - nominal.nominal.x_i_e);
  m.y_i_m = clamp(measured.y_i_e - nominal.nominal.y_i_e);
  return m;
}

ControlInput robust_action(const UncertaintyVector& z_m,
                           const UncertaintyVector& z_m_rate,
                           const RobustGains& gains) {
  ControlInput u;
  u.delta_t = gains.k_s(0) * std::tanh(gains.k_p(0) * z_m.y_t_m +
                                       gains.k_d(0) * z_m_rate.y_t_m);
  u.lambda = gains.k_s(1) * std::tanh(gains.k_p(1) * z_m.y_i_m +
                                      gains.k_d(1) * z_m_rate.y_i_m);
  u.hp = gains.k_s(2) * std::tanh(gains.k_p(2) * z_m.x_t_m +
                                  gains.k_d(2) * z_m_rate.x_t_m);
  return u;
}

CombinedControl combine_control(const ControlInput& u_f, const ErrorInput& u_b,
                                const ControlInput& u_m) {
  CombinedControl out;
  out.u.delta_t = u_f.delta_t - u_b.delta_t_e + u_m.delta_t;
  out.u.lambda = u_f.lambda - u_b.lambda_e + u_m.lambda;
  out.u.hp = u_f.hp - u_b.hp_e + u_m.hp;

  out.u.delta_t = clamp_abs(out.u.delta_t, kSteeringClamp, out.clamped);
  out.u.lambda = clamp_abs(out.u.lambda, kSteeringClamp, out.clamped);
  if (out.u.hp < 0.0) {
    out.u.hp = 0.0;
    out.clamped = true;
  } else if (out.u.hp > 1.0) {
    out.u.hp = 1.0;
    out.clamped = true;
  }
  return out;
}

MpcConfig tighten_input_bounds(const MpcConfig& cfg, const RobustGains& gains) {
  MpcConfig tightened = cfg;
  for (int c = 0; c < 3; ++c) {
    const double shrunk = cfg.u_mag_bound(c) - gains.k_s(c);
    if (shrunk < 0.0) {
      throw std::invalid_argument(
          "tightened input set is empty: saturation amplitude exceeds the bound");
    }
    tightened.u_mag_bound(c) = shrunk;
  }
  return tightened;
}

TubeController::TubeController(const RobustGains& gains, double ts)
    : gains_(gains), ts_(ts) {
  gains_.validate();
  if (ts <= 0.0) {
    throw std::invalid_argument("tube controller: sampling period must be positive");
  }
}

void TubeController::initialize(const ErrorState& measured) {
  state_ = NominalModelState{};
  state_.nominal = measured;
  initialized_ = true;
}

ControlInput TubeController::update(const ErrorState& measured) {
  if (!initialized_) {
    throw std::logic_error("tube controller used before initialization");
  }

  // Re-synchronize a nominal model that has drifted out of the clamp box on
  // every measurable channel for too long.
  const Eigen::Vector4d raw(measured.x_t_e - state_.nominal.x_t_e,
                            measured.y_t_e - state_.nominal.y_t_e,
                            measured.x_i_e - state_.nominal.x_i_e,
                            measured.y_i_e - state_.nominal.y_i_e);
  if ((raw.cwiseAbs().array() > kMismatchClamp).all()) {
    state_.outside_clamp_steps += 1;
  } else {
    state_.outside_clamp_steps = 0;
  }
  if (state_.outside_clamp_steps >= kResyncSteps) {
    state_.nominal = measured;
    state_.outside_clamp_steps = 0;
  }

  const UncertaintyVector z_m = uncertainty_vector(state_, measured);
  UncertaintyVector rate{};
  if (state_.has_prev) {
    const Eigen::Vector4d diff = (z_m.to_vector() - state_.z_m.to_vector()) / ts_;
    const double alpha = gains_.derivative_filter_tau > 0.0
                             ? std::exp(-ts_ / gains_.derivative_filter_tau)
                             : 0.0;
    const Eigen::Vector4d filtered =
        alpha * state_.z_m_rate.to_vector() + (1.0 - alpha) * diff;
    rate = UncertaintyVector{filtered(0), filtered(1), filtered(2), filtered(3)};
  }
  state_.z_m = z_m;
  state_.z_m_rate = rate;
  state_.has_prev = true;
  return robust_action(z_m, rate, gains_);
}

void TubeController::propagate(const LtvDiscrete& model, const ErrorInput& u_e_applied) {
  if (!initialized_) {
    throw std::logic_error("tube controller used before initialization");
  }
  state_ = propagate_nominal(state_, model, u_e_applied);
}

}  // namespace ttmpc
