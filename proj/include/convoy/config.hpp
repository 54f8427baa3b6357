#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "convoy/comms.hpp"
#include "convoy/mpc.hpp"
#include "convoy/planner.hpp"
#include "convoy/scenario.hpp"
#include "convoy/vehicle.hpp"

namespace convoy {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ControllerKind { kDmpc, kCmpc, kPiLoc, kPiReflec };
enum class Topology { kStar, kChain };

std::string controller_name(ControllerKind kind);
ControllerKind controller_from_string(const std::string& name);

struct RobotConfig {
  VehicleParams params;
  double noise_std{0.0};  // m (and rad for heading)
  Pose2 bias;             // body-frame localization offset
};

/// Forced slowdown of one robot (its commanded velocity is overridden to
/// zero for the given window); robot < 0 disables it.
struct DisturbanceConfig {
  int robot{-1};
  double start_s{0.0};
  double duration_s{0.0};
};

/// Optional global overrides of the constraint set seen by the MPC (used
/// for model-mismatch studies); plant limits stay per-robot.
struct MpcModelOverrides {
  std::optional<double> v_min, v_max;
  std::optional<double> delta_min, delta_max;
  std::optional<double> dv_max, ddelta_max;
  std::optional<double> actuator_tau;
  std::optional<double> wheelbase;
};

struct ConvoyConfig {
  // Path: either a named scenario or explicit waypoints.
  bool use_waypoints{false};
  ScenarioKind scenario{ScenarioKind::kStraight};
  ScenarioParams scenario_params;
  std::vector<Pose2> waypoints;
  bool closed{false};
  double corridor_half_width{0.5};

  std::vector<RobotConfig> robots;
  ControllerKind controller{ControllerKind::kDmpc};
  SpacingMode spacing_mode{SpacingMode::kEuclidean};
  double d_target{1.5};
  double d_min{0.8};
  double d_max{3.0};
  double v_des{0.7};
  Topology topology{Topology::kStar};
  double control_rate_hz{10.0};
  double sim_dt{0.01};
  double duration_s{0.0};  // either duration_s or laps must be set
  int laps{0};
  double coupling_travel{0.27};

  ChannelConfig channel;
  RangeSensorConfig range_sensor;

  mpc::CostWeights weights;
  int horizon{15};
  double horizon_dt{0.25};
  MpcModelOverrides mpc_overrides;

  PiGains pi;

  std::uint64_t seed{1};
  DisturbanceConfig disturbance;

  void validate() const;
};

/// Parses a config JSON document. Throws ConfigError with a diagnostic on
/// malformed input.
ConvoyConfig parse_config(const std::string& json_text);

/// Loads a config file and applies dotted-key overrides
/// ("channel.base_delay_s=0.1"). Overrides must reference existing keys.
ConvoyConfig load_config(const std::string& file_path,
                         const std::vector<std::string>& overrides);

}  // namespace convoy
