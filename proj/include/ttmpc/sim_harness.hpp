#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ttmpc/angles.hpp"
#include "ttmpc/error_model.hpp"
#include "ttmpc/ff_robust.hpp"
#include "ttmpc/lmpc.hpp"
#include "ttmpc/trajectory.hpp"
#include "ttmpc/vehicle_model.hpp"

namespace ttmpc {

/// Sensor noise magnitudes. GPS position errors are uniform on a disc of
/// the given radius (bounded, non-Gaussian); speed and steering/relative
/// angle measurements carry zero-mean Gaussian noise. Yaw measurements pass
/// through unperturbed unless yaw_sigma is set. The seed fully determines
/// every draw.
struct NoiseConfig {
  double gps_position_bound = 0.03;           ///< [m]
  double steering_sigma = deg_to_rad(1.0);    ///< [rad]
  double speed_sigma = 0.1;                   ///< [m/s]
  double yaw_sigma = 0.0;                     ///< [rad]
  std::uint64_t seed = 42;

  void validate() const;
};

/// Closed-loop simulation setup.
struct SimConfig {
  double controller_period = 0.2;  ///< [s], must be an integer multiple of plant_dt
  double plant_dt = 0.01;          ///< [s]
  double duration = 0.0;           ///< [s]; 0 selects laps * trajectory duration
  double laps = 1.0;
  double initial_lateral_offset = 0.0;   ///< [m], applied to both bodies
  double initial_heading_offset = 0.0;   ///< [rad], applied to both yaws
  double lateral_drift = 0.0;            ///< [m/s] body-lateral disturbance velocity
  bool feedback_enabled = true;
  bool feedforward_enabled = true;
  bool robust_enabled = true;
  bool tighten_bounds = false;  ///< shrink the MPC bounds by the robust amplitudes

  void validate() const;
  int substeps() const;
};

enum class SegmentClass { kStraight = 0, kCurved = 1, kBlend = 2 };

const char* to_string(SegmentClass c);

/// Everything logged at one controller period.
struct StepRecord {
  double t = 0.0;
  VehicleState true_state;
  VehicleState measured_state;
  ReferenceSample ref;
  ErrorState z_e;  ///< from the measured state
  ControlInput u_f;
  ErrorInput u_b;
  ControlInput u_m;
  ControlInput u;  ///< applied plant input (delta_t, lambda, hp)
  double beta = 0.0;
  double delta_i_applied = 0.0;
  UncertaintyVector z_m;
  MpcDiagnostics qp;
  bool clamped = false;
  double err_tractor = 0.0;  ///< Euclidean distance to the reference at t
  double err_trailer = 0.0;
  SegmentClass seg_class = SegmentClass::kStraight;
};

struct ErrorStat {
  double mean = 0.0;
  double max = 0.0;
  long count = 0;
};

/// Aggregated tracking and solver statistics, split by segment class.
struct RunMetrics {
  ErrorStat tractor[3];
  ErrorStat trailer[3];
  ErrorStat tractor_all;
  ErrorStat trailer_all;
  double robust_norm_mean[3] = {0.0, 0.0, 0.0};  ///< mean |u_m| per class
  double qp_ms_mean = 0.0;
  double qp_ms_max = 0.0;
  double qp_iter_mean = 0.0;
  int qp_iter_max = 0;
  long constraint_active_steps = 0;
  long clamp_engagements = 0;
  long qp_failures = 0;
};

struct RunResult {
  std::vector<StepRecord> records;
  RunMetrics metrics;
  bool aborted = false;
  std::string abort_reason;
};

/// Deterministic random stream with a documented draw order. Normal draws
/// use the basic Box-Muller form (exactly two engine words per draw), disc
/// draws use two words; identical seeds replay identical streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01();
  double normal(double sigma);
  /// Uniform draw on a disc of the given radius, returned as (dx, dy).
  Eigen::Vector2d disc(double radius);

 private:
  std::mt19937_64 engine_;
};

/// Perturbs the measurable channels. Draw order per call: tractor position
/// disc, trailer position disc, speed normal, tractor yaw normal, trailer
/// yaw normal.
VehicleState inject_measurement_noise(const VehicleState& true_state,
                                      const NoiseConfig& noise, Rng& rng);

/// Runs the full closed loop at the controller rate: sample reference,
/// measure, form the error state, linearize + discretize, feedback MPC,
/// feedforward, tube-based robust action, combine, integrate the plant.
/// Deterministic under a fixed seed. A controller abort (repeated QP
/// failure) ends the run early with partial records and aborted status.
RunResult run_closed_loop(const ReferenceTrajectory& traj,
                          const VehicleParams& params, const SimConfig& sim,
                          const NoiseConfig& noise, const RobustGains& gains,
                          const MpcConfig& mpc_cfg);

/// Aggregates per-class tracking statistics from logged records.
RunMetrics compute_metrics(const std::vector<StepRecord>& records);

}  // namespace ttmpc
