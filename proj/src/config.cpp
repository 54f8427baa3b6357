#include "convoy/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace convoy {

namespace {

using nlohmann::json;

double get_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) {
    throw ConfigError(std::string("config: '") + key + "' must be a number");
  }
  return j[key].get<double>();
}

Pose2 parse_pose(const json& j) {
  return Pose2(get_number(j, "x", 0.0), get_number(j, "y", 0.0),
               get_number(j, "theta", 0.0));
}

template <std::size_t N>
std::array<double, N> parse_array(const json& j, const char* key,
                                  const std::array<double, N>& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& a = j[key];
  if (!a.is_array() || a.size() != N) {
    throw ConfigError(std::string("config: '") + key + "' must be an array of " +
                      std::to_string(N));
  }
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = a[i].get<double>();
  return out;
}

RobotConfig parse_robot(const json& j) {
  RobotConfig r;
  r.params.wheelbase = get_number(j, "wheelbase", r.params.wheelbase);
  r.params.v_min = get_number(j, "v_min", r.params.v_min);
  r.params.v_max = get_number(j, "v_max", r.params.v_max);
  r.params.delta_min = get_number(j, "delta_min", r.params.delta_min);
  r.params.delta_max = get_number(j, "delta_max", r.params.delta_max);
  r.params.dv_max = get_number(j, "dv_max", r.params.dv_max);
  r.params.ddelta_max = get_number(j, "ddelta_max", r.params.ddelta_max);
  r.params.actuator_tau = get_number(j, "actuator_tau", r.params.actuator_tau);
  r.noise_std = get_number(j, "noise_std", 0.0);
  if (j.contains("bias")) r.bias = parse_pose(j["bias"]);
  return r;
}

ConvoyConfig parse_json(const json& j) {
  ConvoyConfig cfg;

  if (!j.contains("path")) throw ConfigError("config: missing 'path' block");
  const json& path = j["path"];
  cfg.corridor_half_width =
      get_number(path, "corridor_half_width", cfg.corridor_half_width);
  if (path.contains("waypoints")) {
    cfg.use_waypoints = true;
    for (const auto& wp : path["waypoints"]) {
      cfg.waypoints.push_back(parse_pose(wp));
    }
    cfg.closed = path.value("closed", false);
  } else if (path.contains("scenario")) {
    cfg.scenario = scenario_kind_from_string(path["scenario"].get<std::string>());
    if (path.contains("params")) {
      const json& p = path["params"];
      cfg.scenario_params.length = get_number(p, "length", cfg.scenario_params.length);
      cfg.scenario_params.radius = get_number(p, "radius", cfg.scenario_params.radius);
      cfg.scenario_params.width = get_number(p, "width", cfg.scenario_params.width);
      cfg.scenario_params.height = get_number(p, "height", cfg.scenario_params.height);
      cfg.scenario_params.corner_radius =
          get_number(p, "corner_radius", cfg.scenario_params.corner_radius);
      cfg.scenario_params.leg = get_number(p, "leg", cfg.scenario_params.leg);
      cfg.scenario_params.span = get_number(p, "span", cfg.scenario_params.span);
    }
  } else {
    throw ConfigError("config: path needs 'scenario' or 'waypoints'");
  }

  if (!j.contains("robots") || !j["robots"].is_array() || j["robots"].empty()) {
    throw ConfigError("config: 'robots' must be a non-empty array");
  }
  for (const auto& rj : j["robots"]) {
    cfg.robots.push_back(parse_robot(rj));
  }

  if (j.contains("controller")) {
    cfg.controller = controller_from_string(j["controller"].get<std::string>());
  }
  if (j.contains("spacing_mode")) {
    const std::string mode = j["spacing_mode"].get<std::string>();
    if (mode == "euclidean") {
      cfg.spacing_mode = SpacingMode::kEuclidean;
    } else if (mode == "arclength") {
      cfg.spacing_mode = SpacingMode::kArcLength;
    } else {
      throw ConfigError("config: spacing_mode must be euclidean or arclength");
    }
  }
  cfg.d_target = get_number(j, "d_target", cfg.d_target);
  cfg.d_min = get_number(j, "d_min", cfg.d_min);
  cfg.d_max = get_number(j, "d_max", cfg.d_max);
  cfg.v_des = get_number(j, "v_des", cfg.v_des);
  if (j.contains("topology")) {
    const std::string topo = j["topology"].get<std::string>();
    if (topo == "star") {
      cfg.topology = Topology::kStar;
    } else if (topo == "chain") {
      cfg.topology = Topology::kChain;
    } else {
      throw ConfigError("config: topology must be star or chain");
    }
  }
  cfg.control_rate_hz = get_number(j, "control_rate_hz", cfg.control_rate_hz);
  cfg.sim_dt = get_number(j, "sim_dt", cfg.sim_dt);
  cfg.duration_s = get_number(j, "duration_s", 0.0);
  cfg.laps = static_cast<int>(get_number(j, "laps", 0.0));
  cfg.coupling_travel = get_number(j, "coupling_travel", cfg.coupling_travel);

  if (j.contains("channel")) {
    const json& c = j["channel"];
    cfg.channel.base_delay = get_number(c, "base_delay_s", 0.02);
    cfg.channel.jitter_std = get_number(c, "jitter_std_s", 0.005);
    cfg.channel.drop_prob = get_number(c, "drop_prob", 0.0);
    cfg.range_sensor.noise_std = get_number(c, "range_noise_std_m", 0.0);
    cfg.range_sensor.bias = get_number(c, "range_bias_m", 0.0);
    cfg.range_sensor.max_range = get_number(c, "range_max_m", 10.0);
    cfg.range_sensor.fov = get_number(c, "range_fov_rad", M_PI);
  } else {
    cfg.channel.base_delay = 0.02;
    cfg.channel.jitter_std = 0.005;
  }

  if (j.contains("weights")) {
    const json& w = j["weights"];
    cfg.weights.w_ref = parse_array<3>(w, "w_ref", cfg.weights.w_ref);
    cfg.weights.w_cont = parse_array<2>(w, "w_cont", cfg.weights.w_cont);
    cfg.weights.w_acc = parse_array<2>(w, "w_acc", cfg.weights.w_acc);
    cfg.weights.w_dist = get_number(w, "w_dist", cfg.weights.w_dist);
    cfg.horizon = static_cast<int>(get_number(w, "K", cfg.horizon));
    cfg.horizon_dt = get_number(w, "dT", cfg.horizon_dt);
    // Constraint-set overrides for the controller model; d-values and the
    // corridor default to the top-level/path values when absent.
    if (w.contains("v_box")) {
      const auto box = parse_array<2>(w, "v_box", {0.0, 0.0});
      cfg.mpc_overrides.v_min = box[0];
      cfg.mpc_overrides.v_max = box[1];
    }
    if (w.contains("delta_box")) {
      const auto box = parse_array<2>(w, "delta_box", {0.0, 0.0});
      cfg.mpc_overrides.delta_min = box[0];
      cfg.mpc_overrides.delta_max = box[1];
    }
    if (w.contains("dv_max")) cfg.mpc_overrides.dv_max = w["dv_max"].get<double>();
    if (w.contains("ddelta_max")) {
      cfg.mpc_overrides.ddelta_max = w["ddelta_max"].get<double>();
    }
    if (w.contains("actuator_tau")) {
      cfg.mpc_overrides.actuator_tau = w["actuator_tau"].get<double>();
    }
    if (w.contains("wheelbase")) {
      cfg.mpc_overrides.wheelbase = w["wheelbase"].get<double>();
    }
    if (w.contains("corridor_half_width")) {
      cfg.corridor_half_width = w["corridor_half_width"].get<double>();
    }
    if (w.contains("d_min")) cfg.d_min = w["d_min"].get<double>();
    if (w.contains("d_target")) cfg.d_target = w["d_target"].get<double>();
    if (w.contains("d_max")) cfg.d_max = w["d_max"].get<double>();
  }

  if (j.contains("pi")) {
    const json& p = j["pi"];
    cfg.pi.kp = get_number(p, "kp", cfg.pi.kp);
    cfg.pi.ki = get_number(p, "ki", cfg.pi.ki);
  }
  cfg.pi.v_min = 0.0;
  if (!cfg.robots.empty()) cfg.pi.v_max = cfg.robots[0].params.v_max;

  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();

  if (j.contains("disturbance")) {
    const json& d = j["disturbance"];
    cfg.disturbance.robot = static_cast<int>(get_number(d, "robot", -1.0));
    cfg.disturbance.start_s = get_number(d, "start_s", 0.0);
    cfg.disturbance.duration_s = get_number(d, "duration_s", 0.0);
  }

  cfg.validate();
  return cfg;
}

}  // namespace

std::string controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kDmpc: return "dmpc";
    case ControllerKind::kCmpc: return "cmpc";
    case ControllerKind::kPiLoc: return "piloc";
    case ControllerKind::kPiReflec: return "pireflec";
  }
  return "unknown";
}

ControllerKind controller_from_string(const std::string& name) {
  if (name == "dmpc") return ControllerKind::kDmpc;
  if (name == "cmpc") return ControllerKind::kCmpc;
  if (name == "piloc") return ControllerKind::kPiLoc;
  if (name == "pireflec") return ControllerKind::kPiReflec;
  throw ConfigError("unknown controller: " + name);
}

void ConvoyConfig::validate() const {
  if (robots.empty()) throw ConfigError("config: no robots");
  for (const RobotConfig& r : robots) {
    try {
      r.params.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  if (robots.size() < 2 && controller != ControllerKind::kDmpc) {
    throw ConfigError("config: following controllers need >= 2 robots");
  }
  if (controller == ControllerKind::kCmpc && robots.size() != 2) {
    throw ConfigError("config: cmpc supports exactly 2 robots");
  }
  if (!(d_min < d_target && d_target < d_max)) {
    throw ConfigError("config: need d_min < d_target < d_max");
  }
  if (control_rate_hz <= 0.0 || sim_dt <= 0.0) {
    throw ConfigError("config: control_rate_hz and sim_dt must be > 0");
  }
  if (sim_dt > 0.5 / control_rate_hz + 1e-12) {
    throw ConfigError("config: sim_dt must be <= 1/(2*control_rate)");
  }
  const double period = 1.0 / control_rate_hz;
  const double ratio = period / sim_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6) {
    throw ConfigError("config: control period must be a multiple of sim_dt");
  }
  if (duration_s <= 0.0 && laps <= 0) {
    throw ConfigError("config: set duration_s or laps");
  }
  if (horizon < 2) throw ConfigError("config: K must be >= 2");
  if (horizon_dt <= 0.0) throw ConfigError("config: dT must be > 0");
  if (channel.base_delay < 0.0 || channel.jitter_std < 0.0 ||
      channel.drop_prob < 0.0 || channel.drop_prob > 1.0) {
    throw ConfigError("config: invalid channel parameters");
  }
  if (v_des <= 0.0) throw ConfigError("config: v_des must be > 0");
  try {
    weights.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ConvoyConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  try {
    return parse_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ConvoyConfig load_config(const std::string& file_path,
                         const std::vector<std::string>& overrides) {
  std::ifstream in(file_path);
  if (!in) {
    throw ConfigError("config: cannot open " + file_path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();

  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }

  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override must be key=value: " + ov);
    }
    const std::string key = ov.substr(0, eq);
    const std::string value = ov.substr(eq + 1);

    // Walk the dotted path; every segment must already exist.
    json* node = &j;
    std::size_t begin = 0;
    std::vector<std::string> parts;
    while (begin <= key.size()) {
      const auto dot = key.find('.', begin);
      parts.push_back(key.substr(begin, dot == std::string::npos
                                            ? std::string::npos
                                            : dot - begin));
      if (dot == std::string::npos) break;
      begin = dot + 1;
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->contains(parts[i])) {
        throw ConfigError("override references missing key: " + key);
      }
      node = &(*node)[parts[i]];
    }
    if (!node->contains(parts.back())) {
      throw ConfigError("override references missing key: " + key);
    }
    try {
      (*node)[parts.back()] = json::parse(value);
    } catch (const json::parse_error&) {
      (*node)[parts.back()] = value;  // bare strings stay strings
    }
  }

  try {
    return parse_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace convoy
