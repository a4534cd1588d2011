#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ttmpc/ff_robust.hpp"
#include "ttmpc/lmpc.hpp"
#include "ttmpc/sim_harness.hpp"
#include "ttmpc/trajectory.hpp"
#include "ttmpc/vehicle_model.hpp"

namespace ttmpc {

/// Reference course selection: the "figure8" preset or an explicit segment
/// list.
struct TrajectoryConfig {
  std::string preset = "figure8";
  double straight_length = 20.0;  ///< [m]
  double radius = 10.0;           ///< [m]
  double speed = 1.0;             ///< [m/s]
  double blend_length = 2.0;      ///< [m]
  std::vector<PathSegment> segments;
  TrajectoryPose start;
  bool closed = false;

  ReferenceTrajectory build() const;
};

struct OutputConfig {
  bool write_steps = true;
  bool write_plotdata = true;
  /// Emit a fixed placeholder in the per-row qp_ms column so that identical
  /// runs produce byte-identical files; real timings go to the metrics
  /// summary and the bench command.
  bool deterministic_timing_log = true;
};

struct RunConfig {
  TrajectoryConfig trajectory;
  VehicleParams vehicle;
  MpcConfig mpc;
  RobustGains gains;
  NoiseConfig noise;
  SimConfig sim;
  OutputConfig output;
};

/// Configuration error with the offending location.
struct ConfigError : std::runtime_error {
  ConfigError(const std::string& file, int line_number, const std::string& what_arg)
      : std::runtime_error(file + ":" + std::to_string(line_number) + ": " + what_arg),
        line(line_number) {}
  int line;
};

/// Built-in defaults: the published vehicle, controller and noise parameters
/// with the default figure-eight course.
RunConfig default_run_config();

/// Parses the INI-style key-value configuration. Sections: trajectory,
/// vehicle, mpc, robust, noise, sim, output. Unknown sections or keys and
/// malformed values are rejected with the file name and line number.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(std::istream& in, const std::string& name);

}  // namespace ttmpc
