#include "ttmpc/run_config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ttmpc/angles.hpp"

namespace ttmpc {

ReferenceTrajectory TrajectoryConfig::build() const {
  if (preset == "figure8") {
    return build_figure_eight(straight_length, radius, speed, blend_length);
  }
  if (preset == "segments") {
    return ReferenceTrajectory::from_segments(segments, start, closed);
  }
  throw std::invalid_argument("unknown trajectory preset: " + preset);
}

RunConfig default_run_config() { return RunConfig{}; }

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Parser {
  RunConfig cfg;
  std::string file;
  int line = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(file, line, msg); }

  double number(const std::string& v) const {
    size_t used = 0;
    double x = 0;
    try {
      x = std::stod(v, &used);
    } catch (const std::exception&) {
      fail("expected a number, got '" + v + "'");
    }
    if (trim(v.substr(used)) != "") fail("trailing characters after number in '" + v + "'");
    return x;
  }

  bool boolean(const std::string& v) const {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail("expected a boolean, got '" + v + "'");
  }

  std::vector<double> numbers(const std::string& v, size_t count) const {
    std::istringstream in(v);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(number(tok));
    if (out.size() != count) {
      fail("expected " + std::to_string(count) + " numbers, got " +
           std::to_string(out.size()));
    }
    return out;
  }

  PathSegment segment(const std::string& text) const {
    std::vector<std::string> parts;
    std::string tok;
    std::istringstream in(text);
    while (std::getline(in, tok, ':')) parts.push_back(trim(tok));
    if (parts.empty()) fail("empty segment description");
    PathSegment seg;
    const std::string& kind = parts[0];
    if (kind == "straight" && parts.size() == 3) {
      seg.kind = PathSegment::Kind::kStraight;
      seg.length = number(parts[1]);
      seg.speed = number(parts[2]);
    } else if (kind == "arc" && parts.size() == 4) {
      seg.kind = PathSegment::Kind::kArc;
      seg.length = number(parts[1]);
      seg.kappa_start = seg.kappa_end = number(parts[2]);
      seg.speed = number(parts[3]);
    } else if (kind == "blend" && parts.size() == 5) {
      seg.kind = PathSegment::Kind::kBlend;
      seg.length = number(parts[1]);
      seg.kappa_start = number(parts[2]);
      seg.kappa_end = number(parts[3]);
      seg.speed = number(parts[4]);
    } else if (kind == "dwell" && parts.size() == 2) {
      seg.kind = PathSegment::Kind::kStraight;
      seg.length = 0.0;
      seg.speed = 0.0;
      seg.dwell_duration = number(parts[1]);
    } else {
      fail("bad segment '" + text +
           "' (use straight:len:v, arc:len:kappa:v, blend:len:k0:k1:v, dwell:duration)");
    }
    return seg;
  }

  void apply(const std::string& section, const std::string& key, const std::string& value) {
    using Handler = std::function<void(Parser&, const std::string&)>;
    static const std::map<std::string, std::map<std::string, Handler>> handlers = {
        {"trajectory",
         {
             {"preset", [](Parser& p, const std::string& v) {
                if (v != "figure8" && v != "segments") p.fail("unknown preset '" + v + "'");
                p.cfg.trajectory.preset = v;
              }},
             {"straight_length_m", [](Parser& p, const std::string& v) { p.cfg.trajectory.straight_length = p.number(v); }},
             {"radius_m", [](Parser& p, const std::string& v) { p.cfg.trajectory.radius = p.number(v); }},
             {"speed_mps", [](Parser& p, const std::string& v) { p.cfg.trajectory.speed = p.number(v); }},
             {"blend_length_m", [](Parser& p, const std::string& v) { p.cfg.trajectory.blend_length = p.number(v); }},
             {"segments", [](Parser& p, const std::string& v) {
                p.cfg.trajectory.segments.clear();
                std::istringstream in(v);
                std::string item;
                while (std::getline(in, item, '|')) {
                  p.cfg.trajectory.segments.push_back(p.segment(trim(item)));
                }
              }},
             {"start_x_m", [](Parser& p, const std::string& v) { p.cfg.trajectory.start.x = p.number(v); }},
             {"start_y_m", [](Parser& p, const std::string& v) { p.cfg.trajectory.start.y = p.number(v); }},
             {"start_heading_deg", [](Parser& p, const std::string& v) { p.cfg.trajectory.start.heading = deg_to_rad(p.number(v)); }},
             {"closed", [](Parser& p, const std::string& v) { p.cfg.trajectory.closed = p.boolean(v); }},
         }},
        {"vehicle",
         {
             {"tractor_wheelbase_m", [](Parser& p, const std::string& v) { p.cfg.vehicle.tractor_wheelbase = p.number(v); }},
             {"trailer_length_m", [](Parser& p, const std::string& v) { p.cfg.vehicle.trailer_length = p.number(v); }},
             {"drawbar_length_m", [](Parser& p, const std::string& v) { p.cfg.vehicle.drawbar_length = p.number(v); }},
             {"speed_time_constant_s", [](Parser& p, const std::string& v) { p.cfg.vehicle.speed_time_constant = p.number(v); }},
             {"speed_gain_mps", [](Parser& p, const std::string& v) { p.cfg.vehicle.speed_gain = p.number(v); }},
         }},
        {"mpc",
         {
             {"prediction_horizon", [](Parser& p, const std::string& v) { p.cfg.mpc.prediction_horizon = static_cast<int>(p.number(v)); }},
             {"control_horizon", [](Parser& p, const std::string& v) { p.cfg.mpc.control_horizon = static_cast<int>(p.number(v)); }},
             {"period_s", [](Parser& p, const std::string& v) {
                p.cfg.mpc.ts = p.number(v);
                p.cfg.sim.controller_period = p.cfg.mpc.ts;
              }},
             {"q_diag", [](Parser& p, const std::string& v) {
                const auto q = p.numbers(v, 7);
                for (int i = 0; i < 7; ++i) p.cfg.mpc.q_diag(i) = q[static_cast<size_t>(i)];
              }},
             {"r_diag", [](Parser& p, const std::string& v) {
                const auto r = p.numbers(v, 3);
                for (int i = 0; i < 3; ++i) p.cfg.mpc.r_diag(i) = r[static_cast<size_t>(i)];
              }},
             {"delta_e_max_deg", [](Parser& p, const std::string& v) { p.cfg.mpc.u_mag_bound(0) = deg_to_rad(p.number(v)); }},
             {"lambda_e_max_deg", [](Parser& p, const std::string& v) { p.cfg.mpc.u_mag_bound(1) = deg_to_rad(p.number(v)); }},
             {"hp_e_max", [](Parser& p, const std::string& v) { p.cfg.mpc.u_mag_bound(2) = p.number(v); }},
             {"delta_e_rate_max_deg_s", [](Parser& p, const std::string& v) { p.cfg.mpc.du_rate_bound(0) = deg_to_rad(p.number(v)); }},
             {"lambda_e_rate_max_deg_s", [](Parser& p, const std::string& v) { p.cfg.mpc.du_rate_bound(1) = deg_to_rad(p.number(v)); }},
             {"hp_e_rate_max_per_s", [](Parser& p, const std::string& v) { p.cfg.mpc.du_rate_bound(2) = p.number(v); }},
             {"stagewise_prediction", [](Parser& p, const std::string& v) { p.cfg.mpc.stagewise_model = p.boolean(v); }},
         }},
        {"robust",
         {
             {"enabled", [](Parser& p, const std::string& v) { p.cfg.sim.robust_enabled = p.boolean(v); }},
             {"k_p", [](Parser& p, const std::string& v) {
                const auto k = p.numbers(v, 3);
                for (int i = 0; i < 3; ++i) p.cfg.gains.k_p(i) = k[static_cast<size_t>(i)];
              }},
             {"k_d", [](Parser& p, const std::string& v) {
                const auto k = p.numbers(v, 3);
                for (int i = 0; i < 3; ++i) p.cfg.gains.k_d(i) = k[static_cast<size_t>(i)];
              }},
             {"k_s", [](Parser& p, const std::string& v) {
                const auto k = p.numbers(v, 3);
                for (int i = 0; i < 3; ++i) p.cfg.gains.k_s(i) = k[static_cast<size_t>(i)];
              }},
             {"derivative_filter_tau_s", [](Parser& p, const std::string& v) { p.cfg.gains.derivative_filter_tau = p.number(v); }},
             {"tighten_mpc_bounds", [](Parser& p, const std::string& v) { p.cfg.sim.tighten_bounds = p.boolean(v); }},
         }},
        {"noise",
         {
             {"gps_position_bound_m", [](Parser& p, const std::string& v) { p.cfg.noise.gps_position_bound = p.number(v); }},
             {"steering_sigma_deg", [](Parser& p, const std::string& v) { p.cfg.noise.steering_sigma = deg_to_rad(p.number(v)); }},
             {"speed_sigma_mps", [](Parser& p, const std::string& v) { p.cfg.noise.speed_sigma = p.number(v); }},
             {"yaw_sigma_deg", [](Parser& p, const std::string& v) { p.cfg.noise.yaw_sigma = deg_to_rad(p.number(v)); }},
             {"seed", [](Parser& p, const std::string& v) { p.cfg.noise.seed = static_cast<std::uint64_t>(p.number(v)); }},
         }},
        {"sim",
         {
             {"plant_dt_s", [](Parser& p, const std::string& v) { p.cfg.sim.plant_dt = p.number(v); }},
             {"duration_s", [](Parser& p, const std::string& v) { p.cfg.sim.duration = p.number(v); }},
             {"laps", [](Parser& p, const std::string& v) { p.cfg.sim.laps = p.number(v); }},
             {"initial_lateral_offset_m", [](Parser& p, const std::string& v) { p.cfg.sim.initial_lateral_offset = p.number(v); }},
             {"initial_heading_offset_deg", [](Parser& p, const std::string& v) { p.cfg.sim.initial_heading_offset = deg_to_rad(p.number(v)); }},
             {"lateral_drift_mps", [](Parser& p, const std::string& v) { p.cfg.sim.lateral_drift = p.number(v); }},
             {"feedback", [](Parser& p, const std::string& v) { p.cfg.sim.feedback_enabled = p.boolean(v); }},
             {"feedforward", [](Parser& p, const std::string& v) { p.cfg.sim.feedforward_enabled = p.boolean(v); }},
         }},
        {"output",
         {
             {"write_steps", [](Parser& p, const std::string& v) { p.cfg.output.write_steps = p.boolean(v); }},
             {"write_plotdata", [](Parser& p, const std::string& v) { p.cfg.output.write_plotdata = p.boolean(v); }},
             {"deterministic_timing_log", [](Parser& p, const std::string& v) { p.cfg.output.deterministic_timing_log = p.boolean(v); }},
         }},
    };

    const auto sec = handlers.find(section);
    if (sec == handlers.end()) fail("unknown section [" + section + "]");
    const auto handler = sec->second.find(key);
    if (handler == sec->second.end()) {
      fail("unknown key '" + key + "' in section [" + section + "]");
    }
    handler->second(*this, value);
  }
};

}  // namespace

RunConfig parse_run_config(std::istream& in, const std::string& name) {
  Parser parser;
  parser.file = name;
  std::string section;
  std::string raw;
  while (std::getline(in, raw)) {
    parser.line += 1;
    std::string s = raw;
    const auto comment = s.find_first_of("#;");
    if (comment != std::string::npos) s = s.substr(0, comment);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') parser.fail("unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) parser.fail("expected 'key = value'");
    if (section.empty()) parser.fail("key outside of any section");
    parser.apply(section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  return parser.cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  return parse_run_config(in, path);
}

}  // namespace ttmpc
