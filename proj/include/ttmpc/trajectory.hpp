#pragma once

#include <string>
#include <vector>

#include "ttmpc/vehicle_model.hpp"

namespace ttmpc {

/// One piece of a reference path. Curvature is constant for straights and
/// arcs and ramps linearly over blends. Speed is constant per segment.
/// A zero-length segment with speed 0 and dwell_duration > 0 is a dwell,
/// used to model stops (invalid for tracking, caught by validation).
struct PathSegment {
  enum class Kind { kStraight, kArc, kBlend };
  Kind kind = Kind::kStraight;
  double length = 0.0;          ///< [m]
  double kappa_start = 0.0;     ///< signed curvature at the start [1/m]
  double kappa_end = 0.0;       ///< signed curvature at the end [1/m]
  double speed = 1.0;           ///< [m/s]
  double dwell_duration = 0.0;  ///< [s], only for speed == 0 segments

  double duration() const { return speed > 0.0 ? length / speed : dwell_duration; }
};

struct TrajectoryPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

/// Reference state, input and kinematics at one time instant.
struct ReferenceSample {
  double t = 0.0;
  VehicleState z_r;      ///< reference 7-state (tractor pose, trailer pose, speed)
  ControlInput u_r;      ///< reference input (delta_t_r, lambda_r, hp_r)
  double v_r = 0.0;
  double gamma_t_r = 0.0;  ///< reference tractor yaw rate [rad/s]
  double gamma_i_r = 0.0;  ///< reference trailer yaw rate [rad/s]
  double kappa = 0.0;      ///< tractor path curvature at t [1/m]
};

/// Time-based reference trajectory: an ordered chain of path segments,
/// immutable after construction. Sampling is pure and thread-safe.
class ReferenceTrajectory {
 public:
  struct PathPoint {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;  ///< unwrapped
    double kappa = 0.0;
    double speed = 0.0;
    double arclength = 0.0;
  };

  /// Chains the segments from the given start pose. When closed is true the
  /// end pose must coincide with the start within a loose tolerance.
  static ReferenceTrajectory from_segments(std::vector<PathSegment> segments,
                                           TrajectoryPose start, bool closed);

  double duration() const { return total_duration_; }
  double total_length() const { return total_length_; }
  bool closed() const { return closed_; }
  double max_abs_curvature() const;
  const std::vector<PathSegment>& segments() const { return segments_; }

  /// Tractor-path point at time t. Closed trajectories wrap modulo the
  /// duration (heading stays continuous); open trajectories throw
  /// std::domain_error outside [0, duration]. Negative times extrapolate
  /// backward along the start heading (used for the trailer lead-in).
  PathPoint point_at_time(double t) const;

 private:
  struct Frame {
    PathSegment seg;
    TrajectoryPose start;
    double s0 = 0.0;  ///< arclength at segment start
    double t0 = 0.0;  ///< time at segment start
  };

  std::vector<PathSegment> segments_;
  std::vector<Frame> frames_;
  double total_length_ = 0.0;
  double total_duration_ = 0.0;
  double net_heading_ = 0.0;  ///< heading change over one full pass
  bool closed_ = false;

  PathPoint point_in_domain(double t) const;
};

/// Closed 8-shaped course: two straights crossing at the origin joined by
/// two opposite-signed arcs of the given radius, with linear-curvature
/// blends of blend_length inserted at every joint when blend_length > 0.
/// Throws std::invalid_argument when the geometry does not close (e.g.
/// blend too long for the arc).
ReferenceTrajectory build_figure_eight(double straight_length, double radius,
                                       double speed, double blend_length);

/// Full reference sample at time t. The trailer reference follows the same
/// path time-shifted backward by (drawbar + trailer length) / v_r; the
/// reference input comes from the small-angle feedforward relations.
ReferenceSample sample_reference(const ReferenceTrajectory& traj, double t,
                                 const VehicleParams& params);

struct ValidationIssue {
  std::string check;
  double t = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

/// Flags zero reference speed (feedforward singularity and, together with
/// zero yaw rates, loss of controllability), a zero speed-model gain, and
/// curvature jumps above kappa_jump_tol when a twice-differentiable path is
/// required.
ValidationReport validate_trajectory(const ReferenceTrajectory& traj,
                                     const VehicleParams& params,
                                     bool require_c2 = true,
                                     double kappa_jump_tol = 1e-3);

}  // namespace ttmpc
