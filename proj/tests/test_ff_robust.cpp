#include "ttmpc/ff_robust.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "ttmpc/angles.hpp"

using namespace ttmpc;

namespace {

const VehicleParams kParams{};

ReferenceSample make_ref(double v_r, double gamma_t, double gamma_i) {
  ReferenceSample s;
  s.v_r = v_r;
  s.z_r.v = v_r;
  s.gamma_t_r = gamma_t;
  s.gamma_i_r = gamma_i;
  s.kappa = v_r > 0.0 ? gamma_t / v_r : 0.0;
  if (v_r > 0.0) {
    s.u_r.delta_t = gamma_t * kParams.tractor_wheelbase / v_r;
    s.u_r.lambda =
        (gamma_i * kParams.trailer_length - gamma_t * kParams.drawbar_length) / v_r;
    s.u_r.hp = v_r / kParams.speed_gain;
  }
  return s;
}

LtvDiscrete straight_model(double ts = 0.2) {
  return discretize_zoh(linearize_about_reference(make_ref(1.0, 0.0, 0.0), kParams), ts);
}

}  // namespace

TEST_CASE("feedforward: straight line") {
  const auto a = feedforward_action(make_ref(1.0, 0.0, 0.0), 0.1, kParams);
  CHECK(a.u_f.delta_t == 0.0);
  CHECK(a.u_f.lambda == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(a.u_f.hp == doctest::Approx(1.0 / 1.4).epsilon(1e-15));
  CHECK(a.lambda_r == 0.0);
}

TEST_CASE("feedforward: steady 10 m arc") {
  const auto a = feedforward_action(make_ref(1.0, 0.1, 0.1), 0.0, kParams);
  CHECK(a.u_f.delta_t == doctest::Approx(0.14).epsilon(1e-14));
  CHECK(a.u_f.lambda == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(a.lambda_r == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("feedforward: full hydrostat at the top speed") {
  const auto a = feedforward_action(make_ref(1.4, 0.0, 0.0), 0.0, kParams);
  CHECK(a.u_f.hp == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("feedforward: singular references rejected") {
  CHECK_THROWS_AS(feedforward_action(make_ref(0.0, 0.0, 0.0), 0.0, kParams),
                  std::domain_error);
  VehicleParams broken = kParams;
  broken.speed_gain = 0.0;
  CHECK_THROWS_AS(feedforward_action(make_ref(1.0, 0.0, 0.0), 0.0, broken),
                  std::invalid_argument);
}

TEST_CASE("nominal model: zero state and input stay at zero") {
  NominalModelState n;
  n = propagate_nominal(n, straight_model(), ErrorInput{});
  CHECK(n.nominal.to_vector().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("nominal model: pure hydrostat step acts through one input column") {
  const LtvDiscrete m = straight_model();
  NominalModelState n;
  ErrorInput u;
  u.hp_e = 0.1;
  n = propagate_nominal(n, m, u);
  const Vec7 expected = m.B_d.col(2) * 0.1;
  CHECK((n.nominal.to_vector() - expected).cwiseAbs().maxCoeff() < 1e-15);
  // On a straight reference the hydrostat reaches speed and longitudinal
  // channels only.
  CHECK(n.nominal.v_e == doctest::Approx(m.B_d(6, 2) * 0.1));
  CHECK(n.nominal.y_t_e == 0.0);
  CHECK(n.nominal.psi_t_e == 0.0);
  CHECK(n.nominal.y_i_e == 0.0);
  CHECK(n.nominal.psi_i_e == 0.0);
}

TEST_CASE("nominal model: repeated propagation is the discrete LTI recursion") {
  const LtvDiscrete m = straight_model();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-0.2, 0.2);
  NominalModelState n;
  Vec7 z = Vec7::Zero();
  for (int k = 0; k < 25; ++k) {
    ErrorInput u{dist(rng), dist(rng), dist(rng)};
    n = propagate_nominal(n, m, u);
    z = m.A_d * z + m.B_d * u.to_vector();
  }
  CHECK((n.nominal.to_vector() - z).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("uncertainty vector: mismatch, clamping, identity") {
  NominalModelState n;
  ErrorState measured;
  CHECK(uncertainty_vector(n, measured).to_vector().cwiseAbs().maxCoeff() == 0.0);

  measured.y_t_e = 2.5;
  CHECK(uncertainty_vector(n, measured).y_t_m == 1.0);
  measured.y_t_e = -2.5;
  CHECK(uncertainty_vector(n, measured).y_t_m == -1.0);

  measured = ErrorState{};
  measured.x_t_e = 0.1;
  measured.y_t_e = -0.2;
  measured.x_i_e = 0.0;
  measured.y_i_e = 0.3;
  const UncertaintyVector m = uncertainty_vector(n, measured);
  CHECK(m.x_t_m == 0.1);
  CHECK(m.y_t_m == -0.2);
  CHECK(m.x_i_m == 0.0);
  CHECK(m.y_i_m == 0.3);
}

TEST_CASE("robust action: published gains and tanh saturation") {
  const RobustGains gains;
  CHECK(robust_action(UncertaintyVector{}, UncertaintyVector{}, gains)
            .to_vector()
            .cwiseAbs()
            .maxCoeff() == 0.0);

  UncertaintyVector z_m;
  z_m.y_t_m = 0.5;
  const ControlInput u = robust_action(z_m, UncertaintyVector{}, gains);
  CHECK(u.delta_t == doctest::Approx(0.2 * std::tanh(1.0)).epsilon(1e-14));
  CHECK(u.delta_t == doctest::Approx(0.15231883).epsilon(1e-6));

  z_m.y_t_m = 1e6;
  CHECK(robust_action(z_m, UncertaintyVector{}, gains).delta_t ==
        doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("robust action: bounded by the saturation amplitudes") {
  const RobustGains gains;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    UncertaintyVector z{dist(rng), dist(rng), dist(rng), dist(rng)};
    UncertaintyVector r{10 * dist(rng), 10 * dist(rng), 10 * dist(rng), 10 * dist(rng)};
    const Vec3 u = robust_action(z, r, gains).to_vector();
    for (int c = 0; c < 3; ++c) CHECK(std::abs(u(c)) <= gains.k_s(c));
  }
}

TEST_CASE("robust action: strictly increasing while unsaturated") {
  const RobustGains gains;
  double prev = -1.0;
  for (double y = -0.4; y <= 0.4; y += 0.05) {
    UncertaintyVector z;
    z.y_t_m = y;
    const double out = robust_action(z, UncertaintyVector{}, gains).delta_t;
    CHECK(out > prev);
    prev = out;
  }
}

TEST_CASE("robust gains: validation") {
  RobustGains g;
  CHECK_NOTHROW(g.validate());
  g.k_d(0) = g.k_p(0);  // derivative gain must dominate
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g = RobustGains{};
  g.k_s(1) = 0.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("combine control: composition and clamping") {
  const ControlInput u_f{0.14, 0.02, 0.714};
  const ErrorInput u_b{0.01, 0.0, 0.02};
  const ControlInput u_m{0.05, 0.0, 0.0};
  const CombinedControl c = combine_control(u_f, u_b, u_m);
  CHECK(c.u.delta_t == doctest::Approx(0.18).epsilon(1e-14));
  CHECK(c.u.lambda == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(c.u.hp == doctest::Approx(0.694).epsilon(1e-14));
  CHECK_FALSE(c.clamped);

  CHECK(combine_control(ControlInput{0.0, 0.1, 0.5}, ErrorInput{}, ControlInput{})
            .u.to_vector() == ControlInput{0.0, 0.1, 0.5}.to_vector());

  const CombinedControl big =
      combine_control(ControlInput{1.0, -1.0, 1.7}, ErrorInput{}, ControlInput{});
  CHECK(big.clamped);
  CHECK(big.u.delta_t == doctest::Approx(deg_to_rad(35.0)));
  CHECK(big.u.lambda == doctest::Approx(-deg_to_rad(35.0)));
  CHECK(big.u.hp == 1.0);

  const CombinedControl low =
      combine_control(ControlInput{0.0, 0.0, -0.2}, ErrorInput{}, ControlInput{});
  CHECK(low.clamped);
  CHECK(low.u.hp == 0.0);
}

TEST_CASE("tighten_input_bounds: box Pontryagin difference") {
  const MpcConfig cfg;
  const RobustGains gains;
  const MpcConfig tight = tighten_input_bounds(cfg, gains);
  CHECK(tight.u_mag_bound(0) == doctest::Approx(deg_to_rad(12.0) - 0.2).epsilon(1e-12));
  CHECK(tight.u_mag_bound(0) == doctest::Approx(0.0094).epsilon(1e-2));
  CHECK(tight.u_mag_bound(1) == doctest::Approx(deg_to_rad(6.0) - 0.1).epsilon(1e-12));
  CHECK(tight.u_mag_bound(1) == doctest::Approx(0.0047).epsilon(1e-2));
  // The hydrostat amplitude meets its bound exactly: the channel pins to 0.
  CHECK(tight.u_mag_bound(2) == 0.0);

  RobustGains none = gains;
  none.k_s.setZero();
  const MpcConfig same = tighten_input_bounds(cfg, none);
  CHECK((same.u_mag_bound - cfg.u_mag_bound).cwiseAbs().maxCoeff() == 0.0);

  RobustGains oversized = gains;
  oversized.k_s(1) = 1.0;
  CHECK_THROWS_AS(tighten_input_bounds(cfg, oversized), std::invalid_argument);
}

TEST_CASE("tightened feedback plus saturation amplitude stays within the raw bounds") {
  const MpcConfig cfg;
  const RobustGains gains;
  const MpcConfig tight = tighten_input_bounds(cfg, gains);
  const LtvDiscrete model = straight_model();

  std::mt19937 rng(59);
  std::uniform_real_distribution<double> err(-0.6, 0.6);
  MpcState state;
  for (int k = 0; k < 60; ++k) {
    ErrorState z_e;
    z_e.y_t_e = err(rng);
    z_e.psi_t_e = 0.3 * err(rng);
    z_e.y_i_e = err(rng);
    z_e.v_e = 0.2 * err(rng);
    const auto [u_b, diag] = mpc_step(z_e, model, tight, state);
    REQUIRE_FALSE(diag.qp_failed);
    const Vec3 u = u_b.to_vector();
    for (int c = 0; c < 3; ++c) {
      CHECK(std::abs(u(c)) + gains.k_s(c) <= cfg.u_mag_bound(c) + 1e-9);
    }
  }
}

TEST_CASE("tube controller: mismatch drives a correcting action") {
  TubeController tube(RobustGains{}, 0.2);
  tube.initialize(ErrorState{});

  // On-nominal measurement produces no action.
  CHECK(tube.update(ErrorState{}).to_vector().cwiseAbs().maxCoeff() == 0.0);

  // Vehicle below its nominal lateral position (positive lateral error)
  // must steer left: positive tractor steering contribution.
  ErrorState low;
  low.y_t_e = 0.3;
  const ControlInput u = tube.update(low);
  CHECK(u.delta_t > 0.0);

  // Vehicle lagging (positive longitudinal error) must accelerate.
  ErrorState behind;
  behind.x_t_e = 0.3;
  const ControlInput u2 = tube.update(behind);
  CHECK(u2.hp > 0.0);
}

TEST_CASE("tube controller: derivative filter settles on constant mismatch") {
  TubeController tube(RobustGains{}, 0.2);
  tube.initialize(ErrorState{});
  ErrorState off;
  off.y_t_e = 0.2;
  for (int k = 0; k < 100; ++k) tube.update(off);
  CHECK(std::abs(tube.state().z_m_rate.y_t_m) < 1e-9);
  const ControlInput u = tube.update(off);
  CHECK(u.delta_t == doctest::Approx(0.2 * std::tanh(2.0 * 0.2)).epsilon(1e-6));
}

TEST_CASE("tube controller: resynchronizes after ten steps outside the clamp box") {
  TubeController tube(RobustGains{}, 0.2);
  tube.initialize(ErrorState{});
  ErrorState far;
  far.x_t_e = 1.5;
  far.y_t_e = -1.5;
  far.x_i_e = 1.5;
  far.y_i_e = 1.5;
  for (int k = 0; k < 9; ++k) {
    tube.update(far);
    CHECK(std::abs(tube.state().z_m.y_t_m) == 1.0);
  }
  tube.update(far);  // tenth step: nominal snaps to the measurement
  CHECK(tube.state().z_m.to_vector().cwiseAbs().maxCoeff() == 0.0);
  CHECK(tube.state().nominal.x_t_e == 1.5);
}

TEST_CASE("feedforward exactness: open-loop tracking of the figure eight") {
  // Drive the noise-free plant with the feedforward alone from an
  // on-reference start and measure the cross-track error against the path.
  const auto traj = build_figure_eight(20.0, 10.0, 1.0, 2.0);
  const double dt = 0.01;

  const auto ref0 = sample_reference(traj, 0.0, kParams);
  VehicleState z = ref0.z_r;

  const auto cross_track = [&](const VehicleState& state) {
    double best = 1e9;
    for (double s = 0.0; s < traj.duration(); s += 0.02) {
      const auto p = traj.point_at_time(s);
      best = std::min(best, std::hypot(state.x_t - p.x, state.y_t - p.y));
    }
    return best;
  };

  // End of the first full arc: straight, entry blend, then the arc proper.
  double t_arc_end = 0.0;
  for (int i = 0; i < 3; ++i) t_arc_end += traj.segments()[static_cast<size_t>(i)].duration();

  // The feedforward law is applied at the plant rate so the measurement
  // isolates the small-angle bias rather than sample-and-hold lag. The
  // drawbar angle comes from the hitch-link geometry.
  const auto drawbar = [&](const VehicleState& s) {
    const double jx = s.x_i + kParams.trailer_length * std::cos(s.psi_i);
    const double jy = s.y_i + kParams.trailer_length * std::sin(s.psi_i);
    return wrap_to_pi(s.psi_t - std::atan2(s.y_t - jy, s.x_t - jx));
  };
  double max_straight_error = 0.0;
  for (double t = 0.0; t < t_arc_end - 0.5 * dt; t += dt) {
    const auto ref = sample_reference(traj, t, kParams);
    const double beta = drawbar(z);
    const auto ff = feedforward_action(ref, beta, kParams);
    const double lambda_applied = beta + ff.u_f.lambda;
    const ControlInput u{ff.u_f.delta_t, lambda_applied, ff.u_f.hp};
    z = step_rk4(z, u, kParams, dt);
    if (t < 19.0) max_straight_error = std::max(max_straight_error, cross_track(z));
  }
  // Straights: exact up to integration noise (well under 1 cm per 10 m).
  CHECK(max_straight_error < 0.01);
  // One full arc accumulates only the small-angle bias.
  CHECK(cross_track(z) < 0.10);
}
