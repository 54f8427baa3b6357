#pragma once

#include <stdexcept>
#include <vector>

#include "convoy/comms.hpp"
#include "convoy/geometry.hpp"
#include "convoy/path.hpp"

namespace convoy {

/// How the inter-robot distance is defined.
enum class SpacingMode { kEuclidean, kArcLength };

/// K reference poses on the teach path at times spaced dt apart.
struct ReferencePlan {
  std::vector<Pose2> poses;
  std::vector<double> times;
  double anchor_s{0.0};
  bool truncated{false};        // open-path overrun, terminal pose repeated
  int euclidean_fallbacks{0};   // per-k falls back to arc-length offset
  bool velocity_clamped{false}; // negative PI velocity clamped to zero
};

/// Integral state of the spacing PI controller.
struct PiState {
  double integral{0.0};     // m*s
  double last_update{0.0};  // s
};

/// PI gains and output bounds. The windup cap bounds |integral| at
/// v_max / ki so the integral can never demand more than v_max.
struct PiGains {
  double kp{2.8};   // 1/s
  double ki{2.0};   // 1/s^2
  double v_min{0.0};
  double v_max{1.5};
};

/// Thrown when a rollout query time is beyond the interpolation range plus
/// the one-step extrapolation allowance.
class StaleRolloutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Leader references: the anchor extrapolates the localization fix under a
/// constant-velocity assumption, then poses are placed at s0 + k*v_des*dt
/// for k = 1..K. Open-path overrun truncates at the path end with the
/// terminal pose repeated and the plan flagged.
ReferencePlan plan_leader(const TeachPath& path, const PathCoord& loc,
                          double fix_stamp, double v_des, int horizon,
                          double dt, double now);

/// Lie-algebra interpolation of a rollout at the query times. Queries may
/// run up to one rollout step beyond the last stamp (constant-velocity
/// extrapolation from the last two poses); beyond that a StaleRolloutError
/// is thrown. The message's current fix is used as the leading support
/// point.
std::vector<Pose2> interpolate_rollout(const RolloutMessage& rollout,
                                       const std::vector<double>& query_times);

/// Extrapolation allowance of interpolate_rollout: last stamp plus one
/// rollout step.
double rollout_time_limit(const RolloutMessage& rollout);

/// Follower references that keep the commanded spacing behind the leader
/// poses: each leader pose is projected onto the path, offset behind by
/// d_target (chordal or arc-length per mode), and re-sampled on the path.
/// A failed Euclidean search falls back to the arc-length offset for that
/// step and is counted in the plan.
ReferencePlan plan_follower_distance_aware(
    const TeachPath& path, const std::vector<Pose2>& leader_poses,
    const std::vector<double>& times, double d_target, SpacingMode mode);

/// One PI update on the spacing error. e_dist is positive when the actual
/// gap exceeds the target (the follower must speed up). Returns the
/// reference velocity and the updated integral state.
std::pair<double, PiState> pi_velocity(double e_dist, const PiState& pi,
                                       const PiGains& gains, double dt);

/// Follower references at the PI velocity, built like the leader plan.
/// Negative v_ref is clamped to zero and flagged.
ReferencePlan plan_follower_pi(const TeachPath& path, const PathCoord& loc,
                               double fix_stamp, double v_ref, int horizon,
                               double dt, double now);

}  // namespace convoy
