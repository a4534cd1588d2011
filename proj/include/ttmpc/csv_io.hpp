#pragma once

#include <string>
#include <vector>

#include "ttmpc/run_config.hpp"
#include "ttmpc/sim_harness.hpp"

namespace ttmpc {

/// Fixed column order of steps.csv (documented in the README). All numbers
/// are printed with 17 significant digits so parsing recovers them exactly.
extern const std::vector<std::string> kStepsCsvColumns;

/// One row per controller period. When deterministic_timing is set the
/// qp_ms column carries 0 so identical runs produce byte-identical files.
void write_steps_csv(const std::string& path, const std::vector<StepRecord>& records,
                     bool deterministic_timing);

struct StepsCsvData {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;       ///< numeric fields per row
  std::vector<std::string> seg_class;          ///< the one text column
};

StepsCsvData read_steps_csv(const std::string& path);

/// Flat key = value summary of the run metrics.
void write_metrics_txt(const std::string& path, const RunMetrics& metrics,
                       bool aborted, const std::string& abort_reason);

/// Plot-ready files: tracking errors over time, reference/actual xy paths,
/// and the control decomposition with the total-action bounds.
void write_plot_errors_csv(const std::string& path, const std::vector<StepRecord>& records);
void write_plot_path_csv(const std::string& path, const std::vector<StepRecord>& records);
void write_plot_controls_csv(const std::string& path, const std::vector<StepRecord>& records);

/// Runs the closed loop for a loaded configuration and writes all enabled
/// outputs into out_dir (created if missing). Returns the run result.
RunResult simulate_and_write(const RunConfig& cfg, const std::string& out_dir);

}  // namespace ttmpc
