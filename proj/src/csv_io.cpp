#include "ttmpc/csv_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ttmpc/angles.hpp"

namespace ttmpc {

const std::vector<std::string> kStepsCsvColumns = {
    "t",
    "x_t_ref", "y_t_ref", "psi_t_ref", "x_i_ref", "y_i_ref", "psi_i_ref", "v_ref",
    "x_t", "y_t", "psi_t", "x_i", "y_i", "psi_i", "v",
    "x_t_e", "y_t_e", "psi_t_e", "x_i_e", "y_i_e", "psi_i_e", "v_e",
    "u_f_delta_t", "u_f_lambda", "u_f_hp",
    "u_b_delta_t", "u_b_lambda", "u_b_hp",
    "u_m_delta_t", "u_m_lambda", "u_m_hp",
    "u_delta_t", "u_lambda", "u_hp",
    "err_euclid_tractor", "err_euclid_trailer",
    "seg_class", "qp_ms", "qp_iters"};

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void row_values(const StepRecord& r, bool deterministic_timing, std::string& out) {
  const auto add = [&out](double v) {
    out += fmt(v);
    out += ',';
  };
  add(r.t);
  add(r.ref.z_r.x_t); add(r.ref.z_r.y_t); add(r.ref.z_r.psi_t);
  add(r.ref.z_r.x_i); add(r.ref.z_r.y_i); add(r.ref.z_r.psi_i); add(r.ref.z_r.v);
  add(r.true_state.x_t); add(r.true_state.y_t); add(r.true_state.psi_t);
  add(r.true_state.x_i); add(r.true_state.y_i); add(r.true_state.psi_i); add(r.true_state.v);
  add(r.z_e.x_t_e); add(r.z_e.y_t_e); add(r.z_e.psi_t_e);
  add(r.z_e.x_i_e); add(r.z_e.y_i_e); add(r.z_e.psi_i_e); add(r.z_e.v_e);
  add(r.u_f.delta_t); add(r.u_f.lambda); add(r.u_f.hp);
  add(r.u_b.delta_t_e); add(r.u_b.lambda_e); add(r.u_b.hp_e);
  add(r.u_m.delta_t); add(r.u_m.lambda); add(r.u_m.hp);
  add(r.u.delta_t); add(r.u.lambda); add(r.u.hp);
  add(r.err_tractor); add(r.err_trailer);
  out += to_string(r.seg_class);
  out += ',';
  add(deterministic_timing ? 0.0 : r.qp.solve_ms);
  out += std::to_string(r.qp.qp_iterations);
  out += '\n';
}

}  // namespace

void write_steps_csv(const std::string& path, const std::vector<StepRecord>& records,
                     bool deterministic_timing) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  std::string line;
  for (size_t i = 0; i < kStepsCsvColumns.size(); ++i) {
    line += kStepsCsvColumns[i];
    line += i + 1 < kStepsCsvColumns.size() ? ',' : '\n';
  }
  out << line;
  for (const StepRecord& r : records) {
    line.clear();
    row_values(r, deterministic_timing, line);
    out << line;
  }
}

StepsCsvData read_steps_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  StepsCsvData data;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  std::istringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) data.header.push_back(cell);

  const size_t seg_col = 36;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> nums;
    std::string seg;
    size_t col = 0;
    while (std::getline(ls, cell, ',')) {
      if (col == seg_col) {
        seg = cell;
      } else {
        nums.push_back(std::stod(cell));
      }
      ++col;
    }
    data.rows.push_back(std::move(nums));
    data.seg_class.push_back(seg);
  }
  return data;
}

void write_metrics_txt(const std::string& path, const RunMetrics& m, bool aborted,
                       const std::string& abort_reason) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const char* cls[3] = {"straight", "curved", "blend"};
  const auto emit = [&out](const std::string& key, double value) {
    out << key << " = " << fmt(value) << "\n";
  };
  for (int c = 0; c < 3; ++c) {
    emit(std::string("tractor_") + cls[c] + "_mean_m", m.tractor[c].mean);
    emit(std::string("tractor_") + cls[c] + "_max_m", m.tractor[c].max);
    out << "tractor_" << cls[c] << "_count = " << m.tractor[c].count << "\n";
    emit(std::string("trailer_") + cls[c] + "_mean_m", m.trailer[c].mean);
    emit(std::string("trailer_") + cls[c] + "_max_m", m.trailer[c].max);
    emit(std::string("robust_norm_") + cls[c] + "_mean", m.robust_norm_mean[c]);
  }
  emit("tractor_overall_mean_m", m.tractor_all.mean);
  emit("tractor_overall_max_m", m.tractor_all.max);
  emit("trailer_overall_mean_m", m.trailer_all.mean);
  emit("trailer_overall_max_m", m.trailer_all.max);
  emit("qp_solve_mean_ms", m.qp_ms_mean);
  emit("qp_solve_max_ms", m.qp_ms_max);
  emit("qp_iterations_mean", m.qp_iter_mean);
  out << "qp_iterations_max = " << m.qp_iter_max << "\n";
  out << "constraint_active_steps = " << m.constraint_active_steps << "\n";
  out << "clamp_engagements = " << m.clamp_engagements << "\n";
  out << "qp_failures = " << m.qp_failures << "\n";
  out << "aborted = " << (aborted ? "true" : "false") << "\n";
  if (aborted) out << "abort_reason = " << abort_reason << "\n";
}

void write_plot_errors_csv(const std::string& path, const std::vector<StepRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,err_euclid_tractor,err_euclid_trailer,seg_class\n";
  for (const StepRecord& r : records) {
    out << fmt(r.t) << ',' << fmt(r.err_tractor) << ',' << fmt(r.err_trailer) << ','
        << to_string(r.seg_class) << '\n';
  }
}

void write_plot_path_csv(const std::string& path, const std::vector<StepRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "x_t_ref,y_t_ref,x_i_ref,y_i_ref,x_t,y_t,x_i,y_i\n";
  for (const StepRecord& r : records) {
    out << fmt(r.ref.z_r.x_t) << ',' << fmt(r.ref.z_r.y_t) << ',' << fmt(r.ref.z_r.x_i)
        << ',' << fmt(r.ref.z_r.y_i) << ',' << fmt(r.true_state.x_t) << ','
        << fmt(r.true_state.y_t) << ',' << fmt(r.true_state.x_i) << ','
        << fmt(r.true_state.y_i) << '\n';
  }
}

void write_plot_controls_csv(const std::string& path, const std::vector<StepRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,delta_t_ff,delta_t_fb,delta_t_rb,delta_t_total,delta_t_bound,"
         "delta_i_ff,lambda_fb,delta_i_rb,delta_i_total,delta_i_bound,"
         "hp_ff,hp_fb,hp_rb,hp_total,hp_bound_lo,hp_bound_hi\n";
  const double steer_bound = deg_to_rad(35.0);
  for (const StepRecord& r : records) {
    out << fmt(r.t) << ',' << fmt(r.u_f.delta_t) << ',' << fmt(r.u_b.delta_t_e) << ','
        << fmt(r.u_m.delta_t) << ',' << fmt(r.u.delta_t) << ',' << fmt(steer_bound) << ','
        << fmt(r.u_f.lambda) << ',' << fmt(r.u_b.lambda_e) << ',' << fmt(r.u_m.lambda)
        << ',' << fmt(r.delta_i_applied) << ',' << fmt(steer_bound) << ','
        << fmt(r.u_f.hp) << ',' << fmt(r.u_b.hp_e) << ',' << fmt(r.u_m.hp) << ','
        << fmt(r.u.hp) << ",0,1\n";
  }
}

RunResult simulate_and_write(const RunConfig& cfg, const std::string& out_dir) {
  const ReferenceTrajectory traj = cfg.trajectory.build();
  RunResult result =
      run_closed_loop(traj, cfg.vehicle, cfg.sim, cfg.noise, cfg.gains, cfg.mpc);

  std::filesystem::create_directories(out_dir);
  const auto join = [&out_dir](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  if (cfg.output.write_steps) {
    write_steps_csv(join("steps.csv"), result.records,
                    cfg.output.deterministic_timing_log);
  }
  write_metrics_txt(join("metrics.txt"), result.metrics, result.aborted,
                    result.abort_reason);
  if (cfg.output.write_plotdata) {
    write_plot_errors_csv(join("plot_errors.csv"), result.records);
    write_plot_path_csv(join("plot_path.csv"), result.records);
    write_plot_controls_csv(join("plot_controls.csv"), result.records);
  }
  return result;
}

}  // namespace ttmpc
