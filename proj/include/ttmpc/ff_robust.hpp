#pragma once

#include "ttmpc/error_model.hpp"
#include "ttmpc/lmpc.hpp"
#include "ttmpc/trajectory.hpp"
#include "ttmpc/vehicle_model.hpp"

namespace ttmpc {

/// Gains of the saturated PD tube law, one entry per input channel
/// (tractor steering, trailer steering, hydrostat). The saturation
/// amplitudes k_s are in the units of the respective input; the hydrostat
/// amplitude is a fraction of full range.
struct RobustGains {
  Vec3 k_p = (Vec3() << 2.0, 1.0, 10.0).finished();
  Vec3 k_d = (Vec3() << 4.0, 2.0, 20.0).finished();
  Vec3 k_s = (Vec3() << 0.2, 0.1, 0.1).finished();
  double derivative_filter_tau = 0.4;  ///< low-pass on the mismatch rate [s]

  /// All gains strictly positive and each derivative gain above its
  /// proportional gain (the anti-oscillation requirement).
  void validate() const;
};

/// Position-channel mismatch between the nominal model and the measurement,
/// clamped to [-1, 1] componentwise.
struct UncertaintyVector {
  double x_t_m = 0.0;
  double y_t_m = 0.0;
  double x_i_m = 0.0;
  double y_i_m = 0.0;

  Eigen::Vector4d to_vector() const {
    return Eigen::Vector4d(x_t_m, y_t_m, x_i_m, y_i_m);
  }
};

/// Disturbance-free propagation of the linear error model plus the
/// bookkeeping needed by the tube law.
struct NominalModelState {
  ErrorState nominal;
  UncertaintyVector z_m;       ///< last clamped mismatch
  UncertaintyVector z_m_rate;  ///< filtered mismatch derivative
  bool has_prev = false;
  int outside_clamp_steps = 0;
};

/// Reference inputs for the actual trajectory: tractor steering, trailer
/// steering (the relative-angle reference minus the measured drawbar angle)
/// and the steady-state hydrostat position.
struct FeedforwardAction {
  ControlInput u_f;      ///< (delta_t_r, delta_i_r, hp_r)
  double lambda_r = 0.0; ///< delta_i_r + beta
};

/// Throws std::domain_error when v_r = 0 and std::invalid_argument when the
/// speed gain is zero (both break the feedforward relations).
FeedforwardAction feedforward_action(const ReferenceSample& ref, double beta,
                                     const VehicleParams& params);

/// One disturbance-free model step driven by the applied error input.
NominalModelState propagate_nominal(const NominalModelState& nominal,
                                    const LtvDiscrete& model,
                                    const ErrorInput& u_e_applied);

/// Clamped measured-minus-nominal mismatch on the four position channels.
UncertaintyVector uncertainty_vector(const NominalModelState& nominal,
                                     const ErrorState& measured);

/// Saturated PD law: each output channel is k_s * tanh(k_p e + k_d de) on
/// its measurable companion channel (tractor steering from the tractor
/// lateral mismatch, trailer steering from the trailer lateral mismatch,
/// hydrostat from the tractor longitudinal mismatch).
ControlInput robust_action(const UncertaintyVector& z_m,
                           const UncertaintyVector& z_m_rate,
                           const RobustGains& gains);

struct CombinedControl {
  ControlInput u;
  bool clamped = false;
};

/// u = u_f - u_b + u_m componentwise, followed by the physical actuator
/// saturations (35 degrees on both steering channels, hydrostat in [0, 1]).
CombinedControl combine_control(const ControlInput& u_f, const ErrorInput& u_b,
                                const ControlInput& u_m);

/// Box Pontryagin difference: shrinks the u_e magnitude bounds by the
/// saturation amplitudes. A bound met exactly pins its channel (zero-width
/// box); k_s beyond a bound empties the tightened set and throws.
MpcConfig tighten_input_bounds(const MpcConfig& cfg, const RobustGains& gains);

/// Stateful per-run tube controller: shadows the measured error state with a
/// disturbance-free nominal model, turns the clamped mismatch and its
/// filtered derivative into the saturated PD action, and re-synchronizes the
/// nominal model when the raw gap stays outside the clamp box on all four
/// channels for ten consecutive steps.
class TubeController {
 public:
  TubeController(const RobustGains& gains, double ts);

  /// Anchors the nominal model at the first measured error state.
  void initialize(const ErrorState& measured);

  /// Computes the robust action for the current measurement.
  ControlInput update(const ErrorState& measured);

  /// Advances the nominal model with the applied error input.
  void propagate(const LtvDiscrete& model, const ErrorInput& u_e_applied);

  const NominalModelState& state() const { return state_; }
  bool initialized() const { return initialized_; }

 private:
  RobustGains gains_;
  double ts_;
  NominalModelState state_;
  bool initialized_ = false;
};

}  // namespace ttmpc
