#include "convoy/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace convoy {

namespace {

constexpr double kArcStep = M_PI / 180.0;  // 1 degree

// Appends points of a circular arc around (cx, cy); the start angle is not
// re-emitted when it coincides with the previous waypoint.
void append_arc(std::vector<Pose2>* out, double cx, double cy, double radius,
                double angle_begin, double angle_end, bool skip_first) {
  const double span = angle_end - angle_begin;
  const int n = std::max(2, static_cast<int>(std::ceil(std::abs(span) / kArcStep)));
  for (int i = skip_first ? 1 : 0; i <= n; ++i) {
    const double a = angle_begin + span * static_cast<double>(i) / n;
    out->push_back(Pose2(cx + radius * std::cos(a),
                         cy + radius * std::sin(a), 0.0));
  }
}

void require_positive(double value, const char* what) {
  if (value <= 0.0) {
    throw std::invalid_argument(std::string("generate_scenario: ") + what +
                                " must be > 0");
  }
}

}  // namespace

ScenarioWaypoints generate_scenario(ScenarioKind kind,
                                    const ScenarioParams& params) {
  ScenarioWaypoints out;
  switch (kind) {
    case ScenarioKind::kStraight: {
      require_positive(params.length, "length");
      out.waypoints = {Pose2(0.0, 0.0, 0.0), Pose2(params.length, 0.0, 0.0)};
      out.closed = false;
      return out;
    }
    case ScenarioKind::kCircle: {
      require_positive(params.radius, "radius");
      const int n = 360;
      for (int i = 0; i < n; ++i) {
        const double a = 2.0 * M_PI * static_cast<double>(i) / n;
        out.waypoints.push_back(Pose2(params.radius * std::cos(a),
                                      params.radius * std::sin(a), 0.0));
      }
      out.closed = true;
      return out;
    }
    case ScenarioKind::kSCurve: {
      require_positive(params.radius, "radius");
      require_positive(params.span, "span");
      const double r = params.radius;
      const double lead = 5.0;
      out.waypoints.push_back(Pose2(0.0, 0.0, 0.0));
      out.waypoints.push_back(Pose2(lead, 0.0, 0.0));
      // Left lobe: center (lead, r), from -pi/2 through -pi/2 + span.
      append_arc(&out.waypoints, lead, r, r, -M_PI / 2.0,
                 -M_PI / 2.0 + params.span, true);
      // Right lobe mirrors back; its center sits across the join point.
      const double join_a = -M_PI / 2.0 + params.span;
      const double jx = lead + r * std::cos(join_a);
      const double jy = r + r * std::sin(join_a);
      const double cx = 2.0 * jx - lead;
      const double cy = 2.0 * jy - r;
      append_arc(&out.waypoints, cx, cy, r, join_a + M_PI,
                 join_a + M_PI - params.span, true);
      // Straight lead-out along the exit heading.
      const Pose2 last = out.waypoints.back();
      const Pose2 prev = out.waypoints[out.waypoints.size() - 2];
      const double heading = std::atan2(last.y - prev.y, last.x - prev.x);
      out.waypoints.push_back(Pose2(last.x + lead * std::cos(heading),
                                    last.y + lead * std::sin(heading), 0.0));
      out.closed = false;
      return out;
    }
    case ScenarioKind::kRoundedRect: {
      require_positive(params.width, "width");
      require_positive(params.height, "height");
      require_positive(params.corner_radius, "corner_radius");
      const double w = params.width;
      const double h = params.height;
      const double r = params.corner_radius;
      if (2.0 * r >= w || 2.0 * r >= h) {
        throw std::invalid_argument(
            "generate_scenario: corner_radius too large for rectangle");
      }
      out.waypoints.push_back(Pose2(r, 0.0, 0.0));
      out.waypoints.push_back(Pose2(w - r, 0.0, 0.0));
      append_arc(&out.waypoints, w - r, r, r, -M_PI / 2.0, 0.0, true);
      out.waypoints.push_back(Pose2(w, h - r, 0.0));
      append_arc(&out.waypoints, w - r, h - r, r, 0.0, M_PI / 2.0, true);
      out.waypoints.push_back(Pose2(r, h, 0.0));
      append_arc(&out.waypoints, r, h - r, r, M_PI / 2.0, M_PI, true);
      out.waypoints.push_back(Pose2(0.0, r, 0.0));
      append_arc(&out.waypoints, r, r, r, M_PI, 1.5 * M_PI, true);
      // The final arc point equals the first waypoint; drop it since the
      // path closes implicitly.
      out.waypoints.pop_back();
      out.closed = true;
      return out;
    }
    case ScenarioKind::kSharpCorner: {
      require_positive(params.leg, "leg");
      require_positive(params.radius, "radius");
      const double leg = params.leg;
      const double r = params.radius;
      if (r >= leg) {
        throw std::invalid_argument("generate_scenario: radius must be < leg");
      }
      out.waypoints.push_back(Pose2(0.0, 0.0, 0.0));
      out.waypoints.push_back(Pose2(leg - r, 0.0, 0.0));
      append_arc(&out.waypoints, leg - r, r, r, -M_PI / 2.0, 0.0, true);
      out.waypoints.push_back(Pose2(leg, r + leg, 0.0));
      out.closed = false;
      return out;
    }
  }
  throw std::invalid_argument("generate_scenario: unknown scenario");
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  if (name == "Straight" || name == "straight") return ScenarioKind::kStraight;
  if (name == "Circle" || name == "circle") return ScenarioKind::kCircle;
  if (name == "SCurve" || name == "scurve") return ScenarioKind::kSCurve;
  if (name == "RoundedRect" || name == "rounded_rect") {
    return ScenarioKind::kRoundedRect;
  }
  if (name == "SharpCorner" || name == "sharp_corner") {
    return ScenarioKind::kSharpCorner;
  }
  throw std::invalid_argument("unknown scenario: " + name);
}

}  // namespace convoy
