#include "ttmpc/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ttmpc/angles.hpp"

namespace ttmpc {

namespace {

// 20-point Gauss-Legendre nodes/weights on [0, 1]; blends are short and
// smooth so this integrates their position to machine precision.
constexpr int kGlPoints = 20;
constexpr double kGlNodes[kGlPoints] = {
    0.0034357004074525, 0.0180140363610431, 0.0438827858743370,
    0.0804415140888906, 0.1268340467699246, 0.1819731596367425,
    0.2445664990245864, 0.3131469556422902, 0.3861070744291775,
    0.4617367394332513, 0.5382632605667487, 0.6138929255708225,
    0.6868530443577098, 0.7554335009754136, 0.8180268403632576,
    0.8731659532300754, 0.9195584859111094, 0.9561172141256630,
    0.9819859636389569, 0.9965642995925475};
constexpr double kGlWeights[kGlPoints] = {
    0.0088070035695761, 0.0203007149001935, 0.0313360241670545,
    0.0416383707883524, 0.0509650599086202, 0.0590972659807592,
    0.0658443192245883, 0.0710480546591910, 0.0745864932363019,
    0.0763766935653629, 0.0763766935653629, 0.0745864932363019,
    0.0710480546591910, 0.0658443192245883, 0.0590972659807592,
    0.0509650599086202, 0.0416383707883524, 0.0313360241670545,
    0.0203007149001935, 0.0088070035695761};

double segment_heading(const PathSegment& seg, double s, double heading0) {
  switch (seg.kind) {
    case PathSegment::Kind::kStraight:
      return heading0;
    case PathSegment::Kind::kArc:
      return heading0 + seg.kappa_start * s;
    case PathSegment::Kind::kBlend: {
      const double ramp = (seg.kappa_end - seg.kappa_start) / seg.length;
      return heading0 + seg.kappa_start * s + 0.5 * ramp * s * s;
    }
  }
  return heading0;
}

TrajectoryPose advance_pose(const PathSegment& seg, const TrajectoryPose& p0,
                            double s) {
  TrajectoryPose p = p0;
  switch (seg.kind) {
    case PathSegment::Kind::kStraight:
      p.x += s * std::cos(p0.heading);
      p.y += s * std::sin(p0.heading);
      break;
    case PathSegment::Kind::kArc: {
      const double k = seg.kappa_start;
      const double h1 = p0.heading + k * s;
      p.x += (std::sin(h1) - std::sin(p0.heading)) / k;
      p.y += -(std::cos(h1) - std::cos(p0.heading)) / k;
      p.heading = h1;
      break;
    }
    case PathSegment::Kind::kBlend: {
      double x = 0.0;
      double y = 0.0;
      for (int i = 0; i < kGlPoints; ++i) {
        const double u = s * kGlNodes[i];
        const double h = segment_heading(seg, u, p0.heading);
        x += kGlWeights[i] * std::cos(h);
        y += kGlWeights[i] * std::sin(h);
      }
      p.x += s * x;
      p.y += s * y;
      p.heading = segment_heading(seg, s, p0.heading);
      break;
    }
  }
  return p;
}

double segment_kappa(const PathSegment& seg, double s) {
  if (seg.kind == PathSegment::Kind::kBlend) {
    return seg.kappa_start + (seg.kappa_end - seg.kappa_start) * s / seg.length;
  }
  return seg.kappa_start;
}

}  // namespace

ReferenceTrajectory ReferenceTrajectory::from_segments(
    std::vector<PathSegment> segments, TrajectoryPose start, bool closed) {
  if (segments.empty()) {
    throw std::invalid_argument("trajectory: empty segment list");
  }
  ReferenceTrajectory traj;
  traj.closed_ = closed;

  TrajectoryPose pose = start;
  double s = 0.0;
  double t = 0.0;
  for (const PathSegment& seg : segments) {
    if (seg.length < 0.0 || seg.speed < 0.0) {
      throw std::invalid_argument("trajectory: negative segment length or speed");
    }
    const bool dwell = seg.speed == 0.0;
    if (dwell && (seg.length != 0.0 || seg.dwell_duration <= 0.0)) {
      throw std::invalid_argument(
          "trajectory: zero-speed segment must be a pure dwell with a duration");
    }
    if (!dwell && seg.length == 0.0) {
      continue;  // drop degenerate pieces
    }
    if (seg.kind == PathSegment::Kind::kArc && seg.kappa_start == 0.0) {
      throw std::invalid_argument("trajectory: arc segment with zero curvature");
    }
    Frame f;
    f.seg = seg;
    if (seg.kind != PathSegment::Kind::kBlend) {
      f.seg.kappa_end = f.seg.kappa_start;
    }
    f.start = pose;
    f.s0 = s;
    f.t0 = t;
    traj.frames_.push_back(f);
    traj.segments_.push_back(f.seg);
    pose = advance_pose(f.seg, pose, seg.length);
    s += seg.length;
    t += seg.duration();
  }
  if (traj.frames_.empty()) {
    throw std::invalid_argument("trajectory: no segments with positive length");
  }
  traj.total_length_ = s;
  traj.total_duration_ = t;
  traj.net_heading_ = pose.heading - start.heading;

  if (closed) {
    const double gap = std::hypot(pose.x - start.x, pose.y - start.y);
    if (gap > 1e-6 || std::abs(wrap_to_pi(traj.net_heading_)) > 1e-6) {
      throw std::invalid_argument("trajectory: closed flag set but path does not close");
    }
  }
  return traj;
}

double ReferenceTrajectory::max_abs_curvature() const {
  double k = 0.0;
  for (const PathSegment& seg : segments_) {
    k = std::max({k, std::abs(seg.kappa_start), std::abs(seg.kappa_end)});
  }
  return k;
}

ReferenceTrajectory::PathPoint ReferenceTrajectory::point_in_domain(double t) const {
  // Find the active frame: last frame with t0 <= t.
  size_t lo = 0;
  size_t hi = frames_.size();
  while (hi - lo > 1) {
    const size_t mid = (lo + hi) / 2;
    if (frames_[mid].t0 <= t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const Frame& f = frames_[lo];
  const double local_t = t - f.t0;
  const double local_s = std::min(f.seg.speed * local_t, f.seg.length);

  const TrajectoryPose pose = advance_pose(f.seg, f.start, local_s);
  PathPoint p;
  p.x = pose.x;
  p.y = pose.y;
  p.heading = pose.heading;
  p.kappa = segment_kappa(f.seg, local_s);
  p.speed = f.seg.speed;
  p.arclength = f.s0 + local_s;
  return p;
}

ReferenceTrajectory::PathPoint ReferenceTrajectory::point_at_time(double t) const {
  if (t < 0.0) {
    if (closed_) {
      const double wraps = std::floor(t / total_duration_);
      PathPoint p = point_in_domain(t - wraps * total_duration_);
      p.heading += wraps * net_heading_;
      p.arclength += wraps * total_length_;
      return p;
    }
    // Backward extrapolation along the start heading (trailer lead-in).
    const Frame& f0 = frames_.front();
    PathPoint p;
    const double back = -t * f0.seg.speed;
    p.x = f0.start.x - back * std::cos(f0.start.heading);
    p.y = f0.start.y - back * std::sin(f0.start.heading);
    p.heading = f0.start.heading;
    p.kappa = 0.0;
    p.speed = f0.seg.speed;
    p.arclength = -back;
    return p;
  }
  if (t >= total_duration_) {
    if (!closed_) {
      if (t <= total_duration_ * (1.0 + 1e-12)) {
        return point_in_domain(total_duration_ * (1.0 - 0.0));
      }
      throw std::domain_error("trajectory: sample time outside an open trajectory");
    }
    const double wraps = std::floor(t / total_duration_);
    PathPoint p = point_in_domain(t - wraps * total_duration_);
    p.heading += wraps * net_heading_;
    p.arclength += wraps * total_length_;
    return p;
  }
  return point_in_domain(t);
}

namespace {

struct QuarterGeometry {
  double half_straight = 0.0;
  double blend_length = 0.0;
  double radius = 0.0;

  // y coordinate after straight + entry blend + arc swept down to a south
  // heading, starting from the crossing point at heading alpha.
  double end_y(double alpha) const {
    TrajectoryPose p{0.0, 0.0, alpha};
    if (half_straight > 0.0) {
      PathSegment s{PathSegment::Kind::kStraight, half_straight, 0.0, 0.0, 1.0, 0.0};
      p = advance_pose(s, p, half_straight);
    }
    const double kappa = 1.0 / radius;
    if (blend_length > 0.0) {
      PathSegment b{PathSegment::Kind::kBlend, blend_length, 0.0, -kappa, 1.0, 0.0};
      p = advance_pose(b, p, blend_length);
    }
    const double sweep = alpha + kPi / 2.0 - blend_length / (2.0 * radius);
    if (sweep < 0.0) {
      throw std::invalid_argument("figure eight: blend too long for the arc sweep");
    }
    PathSegment a{PathSegment::Kind::kArc, radius * sweep, -kappa, -kappa, 1.0, 0.0};
    p = advance_pose(a, p, radius * sweep);
    return p.y;
  }
};

}  // namespace

ReferenceTrajectory build_figure_eight(double straight_length, double radius,
                                       double speed, double blend_length) {
  if (radius <= 0.0 || speed <= 0.0 || straight_length < 0.0 || blend_length < 0.0) {
    throw std::invalid_argument("figure eight: invalid dimensions");
  }
  if (blend_length / (2.0 * radius) >= kPi / 2.0) {
    throw std::invalid_argument("figure eight: blend too long for the arc sweep");
  }

  const QuarterGeometry quarter{straight_length / 2.0, blend_length, radius};

  // Crossing half-angle: the unique alpha for which the loop's arc midpoint
  // falls back onto the crossing axis. Bisection on a sign change.
  double lo = 1e-9;
  double hi = kPi / 2.0;
  double f_lo = quarter.end_y(lo);
  double f_hi = quarter.end_y(hi);
  if (f_lo > 0.0 || f_hi < 0.0) {
    throw std::invalid_argument("figure eight: geometry does not close");
  }
  double alpha = 0.5 * (lo + hi);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    alpha = 0.5 * (lo + hi);
    const double f = quarter.end_y(alpha);
    if (f == 0.0) break;
    if ((f < 0.0) == (f_lo < 0.0)) {
      lo = alpha;
      f_lo = f;
    } else {
      hi = alpha;
    }
  }

  const double kappa = 1.0 / radius;
  const double sweep = alpha + kPi / 2.0 - blend_length / (2.0 * radius);
  const double u = straight_length / 2.0;

  std::vector<PathSegment> segs;
  const auto add = [&](PathSegment::Kind kind, double length, double k0, double k1) {
    if (length > 0.0) {
      segs.push_back(PathSegment{kind, length, k0, k1, speed, 0.0});
    }
  };
  for (const double sign : {-1.0, +1.0}) {
    add(PathSegment::Kind::kStraight, 2.0 * u, 0.0, 0.0);
    add(PathSegment::Kind::kBlend, blend_length, 0.0, sign * kappa);
    add(PathSegment::Kind::kArc, 2.0 * sweep * radius, sign * kappa, sign * kappa);
    add(PathSegment::Kind::kBlend, blend_length, sign * kappa, 0.0);
  }

  TrajectoryPose start{-u * std::cos(alpha), -u * std::sin(alpha), alpha};
  return ReferenceTrajectory::from_segments(std::move(segs), start, true);
}

ReferenceSample sample_reference(const ReferenceTrajectory& traj, double t,
                                 const VehicleParams& params) {
  if (!traj.closed() && (t < 0.0 || t > traj.duration() * (1.0 + 1e-12))) {
    throw std::domain_error("trajectory: sample time outside an open trajectory");
  }
  const auto tractor = traj.point_at_time(t);

  ReferenceSample s;
  s.t = t;
  s.v_r = tractor.speed;
  s.kappa = tractor.kappa;
  s.gamma_t_r = tractor.speed * tractor.kappa;

  const double lead = params.drawbar_length + params.trailer_length;
  const double shift = tractor.speed > 0.0 ? lead / tractor.speed : 0.0;
  const auto trailer = traj.point_at_time(t - shift);
  s.gamma_i_r = trailer.speed * trailer.kappa;

  s.z_r.x_t = tractor.x;
  s.z_r.y_t = tractor.y;
  s.z_r.psi_t = tractor.heading;
  s.z_r.x_i = trailer.x;
  s.z_r.y_i = trailer.y;
  s.z_r.psi_i = trailer.heading;
  s.z_r.v = s.v_r;

  if (s.v_r > 0.0) {
    s.u_r.delta_t = s.gamma_t_r * params.tractor_wheelbase / s.v_r;
    s.u_r.lambda = (s.gamma_i_r * params.trailer_length -
                    s.gamma_t_r * params.drawbar_length) /
                   s.v_r;
    s.u_r.hp = s.v_r / params.speed_gain;
  }
  return s;
}

ValidationReport validate_trajectory(const ReferenceTrajectory& traj,
                                     const VehicleParams& params,
                                     bool require_c2, double kappa_jump_tol) {
  ValidationReport report;

  if (params.speed_gain == 0.0) {
    report.issues.push_back({"speed_gain", 0.0, "speed model gain K is zero"});
  }

  const auto& segs = traj.segments();
  double t0 = 0.0;
  for (size_t i = 0; i < segs.size(); ++i) {
    const PathSegment& seg = segs[i];
    if (seg.speed == 0.0) {
      report.issues.push_back(
          {"reference_speed", t0, "reference speed is zero (feedforward singular)"});
      if (seg.kappa_start == 0.0 && seg.kappa_end == 0.0) {
        report.issues.push_back(
            {"controllability", t0,
             "zero speed and zero yaw rates: error model uncontrollable"});
      }
    }
    if (require_c2) {
      const bool last = i + 1 == segs.size();
      if (!last || traj.closed()) {
        const PathSegment& next = segs[last ? 0 : i + 1];
        const double jump = std::abs(next.kappa_start - seg.kappa_end);
        if (jump > kappa_jump_tol) {
          report.issues.push_back(
              {"curvature_continuity", t0 + seg.duration(),
               "curvature jump of " + std::to_string(jump) + " at segment joint"});
        }
      }
    }
    t0 += seg.duration();
  }
  return report;
}

}  // namespace ttmpc
