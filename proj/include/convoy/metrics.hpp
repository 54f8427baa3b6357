#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "convoy/geometry.hpp"
#include "convoy/planner.hpp"
#include "convoy/vehicle.hpp"

namespace convoy {

/// Per-tick event flags, OR-ed into the CSV flags column.
enum TickFlag : std::uint32_t {
  kFlagEuclideanFallback = 1u << 0,
  kFlagInputClamped = 1u << 1,
  kFlagCouplingViolation = 1u << 2,
  kFlagMessageDropped = 1u << 3,
  kFlagSolverNotConverged = 1u << 4,
  kFlagStaleRollout = 1u << 5,
  kFlagNoMessageHold = 1u << 6,
  kFlagRangeInvalid = 1u << 7,
  kFlagPlanTruncated = 1u << 8,
  kFlagDisturbanceActive = 1u << 9,
};

struct RobotSample {
  Pose2 true_pose;
  Pose2 est_pose;
  ControlInput u_cmd;
  ControlInput u_act;
  double lat_err{0.0};
  double s{0.0};  // arc-length coordinate of the true pose
};

struct LogRow {
  double time{0.0};
  std::vector<RobotSample> robots;
  std::vector<double> chord_gaps;  // per adjacent pair
  std::vector<double> arc_gaps;    // per adjacent pair, along the path
  std::uint32_t flags{0};
  double leader_travel{0.0};  // cumulative true distance of robot 0
};

struct TrajectoryLog {
  int n_robots{0};
  double sim_dt{0.0};
  std::vector<LogRow> rows;

  // Run-level event counters.
  std::uint64_t clamp_events{0};
  std::uint64_t fallback_events{0};
  std::uint64_t dropped_messages{0};
  std::uint64_t nonconverged_solves{0};
  std::uint64_t stale_rollouts{0};
  std::uint64_t hold_events{0};
};

/// Writes the trajectory in the stable column order
/// time_s, per robot {x, y, theta, est_x, est_y, est_theta, v_cmd,
/// delta_cmd, v_act, delta_act, lat_err}, per pair gap, flags.
void write_csv(const TrajectoryLog& log, std::ostream& out);

struct TransientMetrics {
  double peak_err_cm{0.0};
  double settling_distance_m{0.0};
};

/// Spacing and path-tracking statistics in the evaluation table format.
struct MetricsReport {
  double mean_err_cm{0.0};
  double rmse_cm{0.0};
  double std_dev_cm{0.0};
  double max_err_cm{0.0};  // signed value of largest magnitude
  double leader_rmse_cm{0.0};
  double leader_max_cm{0.0};
  double follower_rmse_cm{0.0};
  double follower_max_cm{0.0};
  TransientMetrics transient;
  int coupling_violations{0};
  bool aborted{false};

  std::string to_json() const;
};

/// Indices at which |gap - d_target| newly exceeds the coupling travel
/// (one event per contiguous violation episode).
std::vector<std::size_t> coupling_check(const std::vector<double>& gaps,
                                        double d_target, double travel);

/// Statistics over the run, excluding samples before 4 m of leader travel
/// (reported separately as the transient section). The spacing series is the
/// mode gap minus d_target; lateral errors come from the logged projections.
MetricsReport compute_metrics(const TrajectoryLog& log, double d_target,
                              SpacingMode mode, double coupling_travel);

/// Rounds to 6 significant digits, the fixed formatting of all file output.
double round_6sig(double value);
std::string format_6sig(double value);

}  // namespace convoy
