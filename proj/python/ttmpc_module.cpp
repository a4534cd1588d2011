#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ttmpc/csv_io.hpp"
#include "ttmpc/error_model.hpp"
#include "ttmpc/ff_robust.hpp"
#include "ttmpc/lmpc.hpp"
#include "ttmpc/qp_solver.hpp"
#include "ttmpc/run_config.hpp"
#include "ttmpc/sim_harness.hpp"
#include "ttmpc/trajectory.hpp"
#include "ttmpc/vehicle_model.hpp"

namespace py = pybind11;
using namespace ttmpc;

PYBIND11_MODULE(_ttmpc, m) {
  m.doc() = "Trajectory-tracking control for a tractor-trailer: error-model "
            "LMPC, feedforward and tube-based robust control, with a "
            "closed-loop simulator";

  py::class_<VehicleParams>(m, "VehicleParams")
      .def(py::init<>())
      .def_readwrite("tractor_wheelbase", &VehicleParams::tractor_wheelbase)
      .def_readwrite("trailer_length", &VehicleParams::trailer_length)
      .def_readwrite("drawbar_length", &VehicleParams::drawbar_length)
      .def_readwrite("speed_time_constant", &VehicleParams::speed_time_constant)
      .def_readwrite("speed_gain", &VehicleParams::speed_gain)
      .def("validate", &VehicleParams::validate);

  py::class_<VehicleState>(m, "VehicleState")
      .def(py::init<>())
      .def_readwrite("x_t", &VehicleState::x_t)
      .def_readwrite("y_t", &VehicleState::y_t)
      .def_readwrite("psi_t", &VehicleState::psi_t)
      .def_readwrite("x_i", &VehicleState::x_i)
      .def_readwrite("y_i", &VehicleState::y_i)
      .def_readwrite("psi_i", &VehicleState::psi_i)
      .def_readwrite("v", &VehicleState::v)
      .def("to_vector", &VehicleState::to_vector)
      .def_static("from_vector", &VehicleState::from_vector);

  py::class_<ControlInput>(m, "ControlInput")
      .def(py::init<>())
      .def(py::init([](double delta_t, double lambda, double hp) {
             return ControlInput{delta_t, lambda, hp};
           }),
           py::arg("delta_t"), py::arg("lambda_"), py::arg("hp"))
      .def_readwrite("delta_t", &ControlInput::delta_t)
      .def_readwrite("lambda_", &ControlInput::lambda)
      .def_readwrite("hp", &ControlInput::hp)
      .def("to_vector", &ControlInput::to_vector);

  m.def("dynamics_rhs", &dynamics_rhs, py::arg("state"), py::arg("input"),
        py::arg("params"));
  m.def("step_rk4", &step_rk4, py::arg("state"), py::arg("input"), py::arg("params"),
        py::arg("dt"));
  m.def("output_map", &output_map, py::arg("state"));
  m.def("split_relative_angle", &split_relative_angle, py::arg("lambda_"),
        py::arg("beta"));

  py::class_<ReferenceSample>(m, "ReferenceSample")
      .def(py::init<>())
      .def_readwrite("t", &ReferenceSample::t)
      .def_readwrite("z_r", &ReferenceSample::z_r)
      .def_readwrite("u_r", &ReferenceSample::u_r)
      .def_readwrite("v_r", &ReferenceSample::v_r)
      .def_readwrite("gamma_t_r", &ReferenceSample::gamma_t_r)
      .def_readwrite("gamma_i_r", &ReferenceSample::gamma_i_r)
      .def_readwrite("kappa", &ReferenceSample::kappa);

  py::class_<ReferenceTrajectory>(m, "ReferenceTrajectory")
      .def_property_readonly("duration", &ReferenceTrajectory::duration)
      .def_property_readonly("total_length", &ReferenceTrajectory::total_length)
      .def_property_readonly("closed", &ReferenceTrajectory::closed)
      .def_property_readonly("max_abs_curvature", &ReferenceTrajectory::max_abs_curvature);

  m.def("build_figure_eight", &build_figure_eight, py::arg("straight_length") = 20.0,
        py::arg("radius") = 10.0, py::arg("speed") = 1.0, py::arg("blend_length") = 2.0);
  m.def("sample_reference", &sample_reference, py::arg("trajectory"), py::arg("t"),
        py::arg("params"));

  py::class_<ErrorState>(m, "ErrorState")
      .def(py::init<>())
      .def_readwrite("x_t_e", &ErrorState::x_t_e)
      .def_readwrite("y_t_e", &ErrorState::y_t_e)
      .def_readwrite("psi_t_e", &ErrorState::psi_t_e)
      .def_readwrite("x_i_e", &ErrorState::x_i_e)
      .def_readwrite("y_i_e", &ErrorState::y_i_e)
      .def_readwrite("psi_i_e", &ErrorState::psi_i_e)
      .def_readwrite("v_e", &ErrorState::v_e)
      .def("to_vector", &ErrorState::to_vector)
      .def_static("from_vector", &ErrorState::from_vector);

  py::class_<ErrorInput>(m, "ErrorInput")
      .def(py::init<>())
      .def_readwrite("delta_t_e", &ErrorInput::delta_t_e)
      .def_readwrite("lambda_e", &ErrorInput::lambda_e)
      .def_readwrite("hp_e", &ErrorInput::hp_e)
      .def("to_vector", &ErrorInput::to_vector);

  m.def("to_error_frame", &to_error_frame, py::arg("z_r"), py::arg("z"));
  m.def("error_dynamics_nonlinear", &error_dynamics_nonlinear, py::arg("z_e"),
        py::arg("u"), py::arg("ref"), py::arg("gamma_t"), py::arg("gamma_i"),
        py::arg("params"));

  py::class_<LtvContinuous>(m, "LtvContinuous")
      .def_readonly("A", &LtvContinuous::A)
      .def_readonly("B", &LtvContinuous::B);
  py::class_<LtvDiscrete>(m, "LtvDiscrete")
      .def_readonly("A_d", &LtvDiscrete::A_d)
      .def_readonly("B_d", &LtvDiscrete::B_d)
      .def_readonly("ts", &LtvDiscrete::ts);

  m.def("linearize_about_reference", &linearize_about_reference, py::arg("ref"),
        py::arg("params"));
  m.def("discretize_zoh", &discretize_zoh, py::arg("continuous"), py::arg("ts"));

  py::enum_<QpStatus>(m, "QpStatus")
      .value("optimal", QpStatus::kOptimal)
      .value("max_iter", QpStatus::kMaxIter)
      .value("infeasible", QpStatus::kInfeasible);

  py::class_<QpSolution>(m, "QpSolution")
      .def_readonly("x", &QpSolution::x)
      .def_readonly("objective", &QpSolution::objective)
      .def_readonly("iterations", &QpSolution::iterations)
      .def_readonly("status", &QpSolution::status)
      .def_readonly("kkt_residual", &QpSolution::kkt_residual)
      .def_readonly("active_set_size", &QpSolution::active_set_size);

  m.def(
      "solve_qp",
      [](const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
         const std::optional<Eigen::MatrixXd>& G,
         const std::optional<Eigen::VectorXd>& h,
         const std::optional<Eigen::VectorXd>& warm_start, double tol, int max_iter) {
        QpProblem p;
        p.H = H;
        p.g = g;
        p.lower = lower;
        p.upper = upper;
        if (G && h) {
          p.G = *G;
          p.h = *h;
        } else {
          p.G.resize(0, g.size());
          p.h.resize(0);
        }
        QpOptions opts;
        opts.tol = tol;
        opts.max_iter = max_iter;
        return solve_qp(p, warm_start, opts);
      },
      py::arg("H"), py::arg("g"), py::arg("lower"), py::arg("upper"),
      py::arg("G") = std::nullopt, py::arg("h") = std::nullopt,
      py::arg("warm_start") = std::nullopt, py::arg("tol") = 1e-8,
      py::arg("max_iter") = 200);

  py::class_<MpcConfig>(m, "MpcConfig")
      .def(py::init<>())
      .def_readwrite("prediction_horizon", &MpcConfig::prediction_horizon)
      .def_readwrite("control_horizon", &MpcConfig::control_horizon)
      .def_readwrite("ts", &MpcConfig::ts)
      .def_readwrite("q_diag", &MpcConfig::q_diag)
      .def_readwrite("r_diag", &MpcConfig::r_diag)
      .def_readwrite("u_mag_bound", &MpcConfig::u_mag_bound)
      .def_readwrite("du_rate_bound", &MpcConfig::du_rate_bound)
      .def_readwrite("stagewise_model", &MpcConfig::stagewise_model);

  py::class_<MpcState>(m, "MpcState")
      .def(py::init<>())
      .def_readwrite("u_prev", &MpcState::u_prev)
      .def_readonly("consecutive_failures", &MpcState::consecutive_failures);

  py::class_<MpcDiagnostics>(m, "MpcDiagnostics")
      .def_readonly("solve_ms", &MpcDiagnostics::solve_ms)
      .def_readonly("qp_iterations", &MpcDiagnostics::qp_iterations)
      .def_readonly("active_set_size", &MpcDiagnostics::active_set_size)
      .def_readonly("objective", &MpcDiagnostics::objective)
      .def_readonly("kkt_residual", &MpcDiagnostics::kkt_residual)
      .def_readonly("qp_failed", &MpcDiagnostics::qp_failed);

  m.def(
      "mpc_step",
      [](const ErrorState& z_e, const LtvDiscrete& model, const MpcConfig& cfg,
         MpcState& state) { return mpc_step(z_e, model, cfg, state); },
      py::arg("z_e"), py::arg("model"), py::arg("config"), py::arg("state"));
  m.def(
      "build_condensed_qp",
      [](const ErrorState& z_e, const LtvDiscrete& model, const MpcConfig& cfg,
         const MpcState& state) { return build_condensed_qp(z_e, model, cfg, state); },
      py::arg("z_e"), py::arg("model"), py::arg("config"), py::arg("state"));

  py::class_<RobustGains>(m, "RobustGains")
      .def(py::init<>())
      .def_readwrite("k_p", &RobustGains::k_p)
      .def_readwrite("k_d", &RobustGains::k_d)
      .def_readwrite("k_s", &RobustGains::k_s)
      .def_readwrite("derivative_filter_tau", &RobustGains::derivative_filter_tau);

  py::class_<UncertaintyVector>(m, "UncertaintyVector")
      .def(py::init<>())
      .def_readwrite("x_t_m", &UncertaintyVector::x_t_m)
      .def_readwrite("y_t_m", &UncertaintyVector::y_t_m)
      .def_readwrite("x_i_m", &UncertaintyVector::x_i_m)
      .def_readwrite("y_i_m", &UncertaintyVector::y_i_m)
      .def("to_vector", &UncertaintyVector::to_vector);

  py::class_<FeedforwardAction>(m, "FeedforwardAction")
      .def_readonly("u_f", &FeedforwardAction::u_f)
      .def_readonly("lambda_r", &FeedforwardAction::lambda_r);

  py::class_<CombinedControl>(m, "CombinedControl")
      .def_readonly("u", &CombinedControl::u)
      .def_readonly("clamped", &CombinedControl::clamped);

  m.def("feedforward_action", &feedforward_action, py::arg("ref"), py::arg("beta"),
        py::arg("params"));
  m.def("robust_action", &robust_action, py::arg("z_m"), py::arg("z_m_rate"),
        py::arg("gains"));
  m.def("combine_control", &combine_control, py::arg("u_f"), py::arg("u_b"),
        py::arg("u_m"));
  m.def("tighten_input_bounds", &tighten_input_bounds, py::arg("config"),
        py::arg("gains"));

  py::class_<TubeController>(m, "TubeController")
      .def(py::init<const RobustGains&, double>(), py::arg("gains"), py::arg("ts"))
      .def("initialize", &TubeController::initialize)
      .def("update", &TubeController::update)
      .def("propagate", &TubeController::propagate);

  py::class_<NoiseConfig>(m, "NoiseConfig")
      .def(py::init<>())
      .def_readwrite("gps_position_bound", &NoiseConfig::gps_position_bound)
      .def_readwrite("steering_sigma", &NoiseConfig::steering_sigma)
      .def_readwrite("speed_sigma", &NoiseConfig::speed_sigma)
      .def_readwrite("yaw_sigma", &NoiseConfig::yaw_sigma)
      .def_readwrite("seed", &NoiseConfig::seed);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("controller_period", &SimConfig::controller_period)
      .def_readwrite("plant_dt", &SimConfig::plant_dt)
      .def_readwrite("duration", &SimConfig::duration)
      .def_readwrite("laps", &SimConfig::laps)
      .def_readwrite("initial_lateral_offset", &SimConfig::initial_lateral_offset)
      .def_readwrite("initial_heading_offset", &SimConfig::initial_heading_offset)
      .def_readwrite("lateral_drift", &SimConfig::lateral_drift)
      .def_readwrite("feedback_enabled", &SimConfig::feedback_enabled)
      .def_readwrite("feedforward_enabled", &SimConfig::feedforward_enabled)
      .def_readwrite("robust_enabled", &SimConfig::robust_enabled)
      .def_readwrite("tighten_bounds", &SimConfig::tighten_bounds);

  py::class_<ErrorStat>(m, "ErrorStat")
      .def_readonly("mean", &ErrorStat::mean)
      .def_readonly("max", &ErrorStat::max)
      .def_readonly("count", &ErrorStat::count);

  py::class_<RunMetrics>(m, "RunMetrics")
      .def_property_readonly("tractor",
                             [](const RunMetrics& m) {
                               return std::vector<ErrorStat>(m.tractor, m.tractor + 3);
                             })
      .def_property_readonly("trailer",
                             [](const RunMetrics& m) {
                               return std::vector<ErrorStat>(m.trailer, m.trailer + 3);
                             })
      .def_readonly("tractor_all", &RunMetrics::tractor_all)
      .def_readonly("trailer_all", &RunMetrics::trailer_all)
      .def_property_readonly("robust_norm_mean",
                             [](const RunMetrics& m) {
                               return std::vector<double>(m.robust_norm_mean,
                                                          m.robust_norm_mean + 3);
                             })
      .def_readonly("qp_ms_mean", &RunMetrics::qp_ms_mean)
      .def_readonly("qp_ms_max", &RunMetrics::qp_ms_max)
      .def_readonly("qp_iter_mean", &RunMetrics::qp_iter_mean)
      .def_readonly("constraint_active_steps", &RunMetrics::constraint_active_steps)
      .def_readonly("clamp_engagements", &RunMetrics::clamp_engagements)
      .def_readonly("qp_failures", &RunMetrics::qp_failures);

  py::class_<StepRecord>(m, "StepRecord")
      .def_readonly("t", &StepRecord::t)
      .def_readonly("true_state", &StepRecord::true_state)
      .def_readonly("measured_state", &StepRecord::measured_state)
      .def_readonly("ref", &StepRecord::ref)
      .def_readonly("z_e", &StepRecord::z_e)
      .def_readonly("u_f", &StepRecord::u_f)
      .def_readonly("u_b", &StepRecord::u_b)
      .def_readonly("u_m", &StepRecord::u_m)
      .def_readonly("u", &StepRecord::u)
      .def_readonly("beta", &StepRecord::beta)
      .def_readonly("delta_i_applied", &StepRecord::delta_i_applied)
      .def_readonly("err_tractor", &StepRecord::err_tractor)
      .def_readonly("err_trailer", &StepRecord::err_trailer)
      .def_property_readonly(
          "seg_class", [](const StepRecord& r) { return std::string(to_string(r.seg_class)); })
      .def_readonly("qp", &StepRecord::qp);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("records", &RunResult::records)
      .def_readonly("metrics", &RunResult::metrics)
      .def_readonly("aborted", &RunResult::aborted)
      .def_readonly("abort_reason", &RunResult::abort_reason);

  m.def("run_closed_loop", &run_closed_loop, py::arg("trajectory"), py::arg("params"),
        py::arg("sim"), py::arg("noise"), py::arg("gains"), py::arg("mpc"));

  py::class_<ValidationIssue>(m, "ValidationIssue")
      .def_readonly("check", &ValidationIssue::check)
      .def_readonly("t", &ValidationIssue::t)
      .def_readonly("message", &ValidationIssue::message);
  py::class_<ValidationReport>(m, "ValidationReport")
      .def_readonly("issues", &ValidationReport::issues)
      .def("ok", &ValidationReport::ok);
  m.def("validate_trajectory", &validate_trajectory, py::arg("trajectory"),
        py::arg("params"), py::arg("require_c2") = true,
        py::arg("kappa_jump_tol") = 1e-3);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("vehicle", &RunConfig::vehicle)
      .def_readwrite("mpc", &RunConfig::mpc)
      .def_readwrite("gains", &RunConfig::gains)
      .def_readwrite("noise", &RunConfig::noise)
      .def_readwrite("sim", &RunConfig::sim);
  m.def("default_run_config", &default_run_config);
  m.def("load_run_config", &load_run_config, py::arg("path"));
  m.def("simulate_and_write", &simulate_and_write, py::arg("config"),
        py::arg("out_dir"));
}
