#pragma once

#include <string>
#include <vector>

#include "convoy/geometry.hpp"

namespace convoy {

/// Analytic evaluation routes standing in for physically taught paths.
enum class ScenarioKind {
  kStraight,
  kCircle,
  kSCurve,
  kRoundedRect,
  kSharpCorner,
};

struct ScenarioParams {
  double length{50.0};        // Straight
  double radius{5.0};         // Circle / SCurve lobes / corner arcs
  double width{60.0};         // RoundedRect
  double height{30.0};        // RoundedRect
  double corner_radius{5.0};  // RoundedRect
  double leg{10.0};           // SharpCorner leg length
  double span{M_PI / 2.0};    // SCurve lobe angle, rad
};

struct ScenarioWaypoints {
  std::vector<Pose2> waypoints;
  bool closed{false};
};

/// Waypoint list for the named scenario. Throws std::invalid_argument for
/// non-positive parameters.
ScenarioWaypoints generate_scenario(ScenarioKind kind,
                                    const ScenarioParams& params);

ScenarioKind scenario_kind_from_string(const std::string& name);

}  // namespace convoy
