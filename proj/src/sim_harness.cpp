#include "ttmpc/sim_harness.hpp"

#include <cmath>
#include <stdexcept>

namespace ttmpc {

void NoiseConfig::validate() const {
  if (gps_position_bound < 0.0 || steering_sigma < 0.0 || speed_sigma < 0.0 ||
      yaw_sigma < 0.0) {
    throw std::invalid_argument("noise magnitudes must be nonnegative");
  }
}

void SimConfig::validate() const {
  if (controller_period <= 0.0 || plant_dt <= 0.0) {
    throw std::invalid_argument("simulation periods must be positive");
  }
  const double ratio = controller_period / plant_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw std::invalid_argument(
        "controller period must be an integer multiple of the plant step");
  }
  if (duration < 0.0 || laps <= 0.0) {
    throw std::invalid_argument("invalid simulation horizon");
  }
}

int SimConfig::substeps() const {
  return static_cast<int>(std::round(controller_period / plant_dt));
}

const char* to_string(SegmentClass c) {
  switch (c) {
    case SegmentClass::kStraight:
      return "straight";
    case SegmentClass::kCurved:
      return "curved";
    case SegmentClass::kBlend:
      return "blend";
  }
  return "unknown";
}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal(double sigma) {
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

Eigen::Vector2d Rng::disc(double radius) {
  const double r = radius * std::sqrt(uniform01());
  const double phi = 2.0 * kPi * uniform01();
  return {r * std::cos(phi), r * std::sin(phi)};
}

VehicleState inject_measurement_noise(const VehicleState& true_state,
                                      const NoiseConfig& noise, Rng& rng) {
  VehicleState m = true_state;
  const Eigen::Vector2d dt_pos = rng.disc(noise.gps_position_bound);
  const Eigen::Vector2d di_pos = rng.disc(noise.gps_position_bound);
  m.x_t += dt_pos(0);
  m.y_t += dt_pos(1);
  m.x_i += di_pos(0);
  m.y_i += di_pos(1);
  m.v += rng.normal(noise.speed_sigma);
  m.psi_t += rng.normal(noise.yaw_sigma);
  m.psi_i += rng.normal(noise.yaw_sigma);
  return m;
}

namespace {

SegmentClass classify(double kappa, double kappa_max) {
  if (std::abs(kappa) < 1e-6) return SegmentClass::kStraight;
  if (std::abs(kappa) >= kappa_max - 1e-9) return SegmentClass::kCurved;
  return SegmentClass::kBlend;
}

VehicleState apply_initial_offset(const VehicleState& on_ref, const SimConfig& sim) {
  VehicleState z = on_ref;
  const double nx = -std::sin(on_ref.psi_t);
  const double ny = std::cos(on_ref.psi_t);
  z.x_t += sim.initial_lateral_offset * nx;
  z.y_t += sim.initial_lateral_offset * ny;
  z.x_i += sim.initial_lateral_offset * nx;
  z.y_i += sim.initial_lateral_offset * ny;
  z.psi_t += sim.initial_heading_offset;
  z.psi_i += sim.initial_heading_offset;
  return z;
}

}  // namespace

RunResult run_closed_loop(const ReferenceTrajectory& traj,
                          const VehicleParams& params, const SimConfig& sim,
                          const NoiseConfig& noise, const RobustGains& gains,
                          const MpcConfig& mpc_cfg) {
  params.validate();
  sim.validate();
  noise.validate();
  {
    const ValidationReport report = validate_trajectory(traj, params);
    if (!report.ok()) {
      throw std::invalid_argument("trajectory failed validation: " +
                                  report.issues.front().message);
    }
  }
  const MpcConfig cfg_eff =
      sim.tighten_bounds ? tighten_input_bounds(mpc_cfg, gains) : mpc_cfg;
  cfg_eff.validate();

  const double t_end = sim.duration > 0.0 ? sim.duration : sim.laps * traj.duration();
  const int n_steps = static_cast<int>(std::floor(t_end / sim.controller_period)) + 1;
  const int substeps = sim.substeps();
  const double kappa_max = traj.max_abs_curvature();

  Rng rng(noise.seed);
  MpcState mpc_state;
  TubeController tube(gains, sim.controller_period);

  RunResult result;
  result.records.reserve(static_cast<size_t>(n_steps));

  VehicleState true_state = apply_initial_offset(
      sample_reference(traj, 0.0, params).z_r, sim);

  // Drawbar angle from the hitch-link geometry: the link runs from the
  // trailer's front joint (trailer_length ahead of its axle) to the tractor
  // rear axle. Bounded and smooth, unlike a command-lag bookkeeping which
  // integrates transient mismatch.
  const auto drawbar_angle = [&params](const VehicleState& z) {
    const double joint_x = z.x_i + params.trailer_length * std::cos(z.psi_i);
    const double joint_y = z.y_i + params.trailer_length * std::sin(z.psi_i);
    const double link_heading = std::atan2(z.y_t - joint_y, z.x_t - joint_x);
    return wrap_to_pi(z.psi_t - link_heading);
  };

  for (int k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * sim.controller_period;
    StepRecord rec;
    rec.t = t;
    rec.ref = sample_reference(traj, t, params);
    rec.true_state = true_state;
    rec.measured_state = inject_measurement_noise(true_state, noise, rng);
    rec.z_e = to_error_frame(rec.ref.z_r, rec.measured_state);
    rec.seg_class = classify(rec.ref.kappa, kappa_max);

    // Linear model about the current reference; optionally one per stage.
    std::vector<LtvDiscrete> models;
    if (cfg_eff.stagewise_model) {
      models.reserve(static_cast<size_t>(cfg_eff.prediction_horizon));
      for (int i = 0; i < cfg_eff.prediction_horizon; ++i) {
        const auto ref_i =
            sample_reference(traj, t + i * sim.controller_period, params);
        models.push_back(discretize_zoh(linearize_about_reference(ref_i, params),
                                        sim.controller_period));
      }
    } else {
      models.push_back(discretize_zoh(linearize_about_reference(rec.ref, params),
                                      sim.controller_period));
    }

    // Feedback.
    if (sim.feedback_enabled) {
      try {
        const auto [u_b, diag] = mpc_step(rec.z_e, models, cfg_eff, mpc_state);
        rec.u_b = u_b;
        rec.qp = diag;
      } catch (const ControllerAbort& abort) {
        result.aborted = true;
        result.abort_reason = abort.what();
        break;
      }
    }

    // The feedforward consumes the noisy drawbar-angle measurement; its
    // trailer channel is the steering reference delta_i_r = lambda_r - beta.
    const double beta_true = drawbar_angle(true_state);
    const double beta_meas = beta_true + rng.normal(noise.steering_sigma);

    ControlInput ff_combine;  // relative-angle-space feedforward
    if (sim.feedforward_enabled) {
      const FeedforwardAction ff = feedforward_action(rec.ref, beta_meas, params);
      rec.u_f = ff.u_f;
      ff_combine = ff.u_f;
      ff_combine.lambda = ff.lambda_r;
    }

    if (sim.robust_enabled) {
      if (!tube.initialized()) tube.initialize(rec.z_e);
      rec.u_m = tube.update(rec.z_e);
      rec.z_m = tube.state().z_m;
    }

    // Compose and saturate in relative-angle space, then realize the
    // command through the steering actuator: the trailer articulation seen
    // by the plant carries the drawbar measurement error.
    const CombinedControl combined = combine_control(ff_combine, rec.u_b, rec.u_m);
    rec.clamped = combined.clamped;
    rec.u = combined.u;
    rec.u.lambda += beta_true - beta_meas;
    rec.beta = beta_true;
    rec.delta_i_applied = rec.u.lambda - beta_true;

    if (sim.robust_enabled) {
      tube.propagate(models.front(), rec.u_b);
    }

    // Tracking errors against the time reference, from the true state.
    rec.err_tractor = std::hypot(true_state.x_t - rec.ref.z_r.x_t,
                                 true_state.y_t - rec.ref.z_r.y_t);
    rec.err_trailer = std::hypot(true_state.x_i - rec.ref.z_r.x_i,
                                 true_state.y_i - rec.ref.z_r.y_i);
    result.records.push_back(rec);

    // Plant integration with the input held; the drift disturbance adds a
    // body-lateral velocity to both bodies (slip-like side push).
    const auto rhs = [&](const Vec7& z) {
      Vec7 dz = dynamics_rhs(VehicleState::from_vector(z), rec.u, params);
      if (sim.lateral_drift != 0.0) {
        dz(0) -= sim.lateral_drift * std::sin(z(2));
        dz(1) += sim.lateral_drift * std::cos(z(2));
        dz(3) -= sim.lateral_drift * std::sin(z(5));
        dz(4) += sim.lateral_drift * std::cos(z(5));
      }
      return dz;
    };
    Vec7 z = true_state.to_vector();
    for (int s = 0; s < substeps; ++s) z = rk4_step(rhs, z, sim.plant_dt);
    true_state = VehicleState::from_vector(z);
  }

  result.metrics = compute_metrics(result.records);
  return result;
}

RunMetrics compute_metrics(const std::vector<StepRecord>& records) {
  RunMetrics m;
  if (records.empty()) return m;

  double robust_sum[3] = {0.0, 0.0, 0.0};
  long robust_count[3] = {0, 0, 0};
  double iter_sum = 0.0;

  const auto add = [](ErrorStat& stat, double value) {
    stat.mean += value;
    stat.max = std::max(stat.max, value);
    stat.count += 1;
  };

  for (const StepRecord& rec : records) {
    const int c = static_cast<int>(rec.seg_class);
    add(m.tractor[c], rec.err_tractor);
    add(m.trailer[c], rec.err_trailer);
    add(m.tractor_all, rec.err_tractor);
    add(m.trailer_all, rec.err_trailer);
    robust_sum[c] += rec.u_m.to_vector().norm();
    robust_count[c] += 1;
    m.qp_ms_mean += rec.qp.solve_ms;
    m.qp_ms_max = std::max(m.qp_ms_max, rec.qp.solve_ms);
    iter_sum += rec.qp.qp_iterations;
    m.qp_iter_max = std::max(m.qp_iter_max, rec.qp.qp_iterations);
    m.constraint_active_steps += rec.qp.active_set_size > 0 ? 1 : 0;
    m.clamp_engagements += rec.clamped ? 1 : 0;
    m.qp_failures += rec.qp.qp_failed ? 1 : 0;
  }
  for (ErrorStat* stats : {m.tractor, m.trailer}) {
    for (int c = 0; c < 3; ++c) {
      if (stats[c].count > 0) stats[c].mean /= static_cast<double>(stats[c].count);
    }
  }
  m.tractor_all.mean /= static_cast<double>(records.size());
  m.trailer_all.mean /= static_cast<double>(records.size());
  for (int c = 0; c < 3; ++c) {
    if (robust_count[c] > 0) {
      m.robust_norm_mean[c] = robust_sum[c] / static_cast<double>(robust_count[c]);
    }
  }
  m.qp_ms_mean /= static_cast<double>(records.size());
  m.qp_iter_mean = iter_sum / static_cast<double>(records.size());
  return m;
}

}  // namespace ttmpc
