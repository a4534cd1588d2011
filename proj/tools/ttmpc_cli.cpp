#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <vector>

#include "CLI11.hpp"
#include "ttmpc/csv_io.hpp"
#include "ttmpc/run_config.hpp"

namespace {

using namespace ttmpc;

int cmd_simulate(const std::string& config_path, long long seed_override,
                 const std::string& out_dir) {
  RunConfig cfg = load_run_config(config_path);
  if (seed_override >= 0) cfg.noise.seed = static_cast<std::uint64_t>(seed_override);

  const RunResult result = simulate_and_write(cfg, out_dir);
  std::printf("steps: %zu\n", result.records.size());
  std::printf("tractor mean/max error: %.4f / %.4f m\n", result.metrics.tractor_all.mean,
              result.metrics.tractor_all.max);
  std::printf("trailer mean/max error: %.4f / %.4f m\n", result.metrics.trailer_all.mean,
              result.metrics.trailer_all.max);
  std::printf("qp solve mean/max: %.4f / %.4f ms\n", result.metrics.qp_ms_mean,
              result.metrics.qp_ms_max);
  std::printf("outputs written to %s\n", out_dir.c_str());
  if (result.aborted) {
    std::fprintf(stderr, "run aborted: %s (partial logs preserved)\n",
                 result.abort_reason.c_str());
    return 2;
  }
  return 0;
}

int cmd_validate(const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  cfg.vehicle.validate();
  const ReferenceTrajectory traj = cfg.trajectory.build();
  const ValidationReport report = validate_trajectory(traj, cfg.vehicle);
  if (report.ok()) {
    std::printf("trajectory ok: duration %.2f s, length %.2f m, max |kappa| %.4f 1/m\n",
                traj.duration(), traj.total_length(), traj.max_abs_curvature());
    return 0;
  }
  for (const ValidationIssue& issue : report.issues) {
    std::printf("FAIL [%s] at t=%.2f s: %s\n", issue.check.c_str(), issue.t,
                issue.message.c_str());
  }
  return 1;
}

int cmd_bench(int reps, const std::string& config_path, int control_horizon,
              int prediction_horizon) {
  std::printf("reps = %d\n", reps);
  if (reps <= 0) return 0;

  RunConfig cfg = config_path.empty() ? default_run_config() : load_run_config(config_path);
  if (control_horizon > 0) cfg.mpc.control_horizon = control_horizon;
  if (prediction_horizon > 0) cfg.mpc.prediction_horizon = prediction_horizon;
  cfg.mpc.control_horizon = std::min(cfg.mpc.control_horizon, cfg.mpc.prediction_horizon);

  // State distribution from a short noisy run with the same course.
  cfg.sim.duration = 40.0;
  cfg.sim.lateral_drift = 0.05;
  const ReferenceTrajectory traj = cfg.trajectory.build();
  const RunResult warmup =
      run_closed_loop(traj, cfg.vehicle, cfg.sim, cfg.noise, cfg.gains, cfg.mpc);
  if (warmup.records.empty()) return 2;

  std::vector<double> times_ms;
  times_ms.reserve(static_cast<size_t>(reps));
  MpcState state;
  for (int i = 0; i < reps; ++i) {
    const StepRecord& rec = warmup.records[static_cast<size_t>(i) % warmup.records.size()];
    const LtvDiscrete model = discretize_zoh(
        linearize_about_reference(rec.ref, cfg.vehicle), cfg.mpc.ts);
    const auto t0 = std::chrono::steady_clock::now();
    const QpProblem qp = build_condensed_qp(rec.z_e, model, cfg.mpc, state);
    const QpSolution sol = solve_qp(qp);
    const auto t1 = std::chrono::steady_clock::now();
    times_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    if (sol.status == QpStatus::kOptimal) {
      state.u_prev = ErrorInput::from_vector(state.u_prev.to_vector() + sol.x.head<3>());
      state.warm_delta = sol.x;
    }
  }
  std::sort(times_ms.begin(), times_ms.end());
  double sum = 0.0;
  for (double t : times_ms) sum += t;
  std::printf("decision_variables = %d\n", 3 * cfg.mpc.control_horizon);
  std::printf("mean_ms = %.4f\n", sum / static_cast<double>(times_ms.size()));
  std::printf("p95_ms = %.4f\n", times_ms[static_cast<size_t>(0.95 * (times_ms.size() - 1))]);
  std::printf("max_ms = %.4f\n", times_ms.back());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tractor-trailer trajectory tracking: error-model LMPC with "
               "feedforward and tube-based robust control"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  long long seed_override = -1;

  CLI::App* simulate = app.add_subcommand("simulate", "run the closed-loop simulation");
  simulate->add_option("--config", config_path, "configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--seed", seed_override, "override the noise seed");
  simulate->add_option("--out", out_dir, "output directory");

  CLI::App* validate = app.add_subcommand("validate", "check a reference trajectory");
  validate->add_option("--config", config_path, "configuration file")
      ->required()
      ->check(CLI::ExistingFile);

  int reps = 100;
  int bench_nc = 0;
  int bench_np = 0;
  std::string bench_config;
  CLI::App* bench = app.add_subcommand("bench", "time the condensed QP build and solve");
  bench->add_option("--reps", reps, "number of timed solves");
  bench->add_option("--config", bench_config, "configuration file")->check(CLI::ExistingFile);
  bench->add_option("--control-horizon", bench_nc, "override N_c");
  bench->add_option("--prediction-horizon", bench_np, "override N_p");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, seed_override, out_dir);
    if (validate->parsed()) return cmd_validate(config_path);
    if (bench->parsed()) return cmd_bench(reps, bench_config, bench_nc, bench_np);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
