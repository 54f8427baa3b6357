#include "convoy/planner.hpp"

#include <algorithm>
#include <cmath>

namespace convoy {

namespace {

// Shared by the leader and PI follower: constant-velocity reference train
// along the path starting one step ahead of the anchor.
ReferencePlan plan_constant_velocity(const TeachPath& path, double anchor_s,
                                     double v, int horizon, double dt,
                                     double now) {
  ReferencePlan plan;
  plan.anchor_s = anchor_s;
  plan.poses.reserve(horizon);
  plan.times.reserve(horizon);
  for (int k = 1; k <= horizon; ++k) {
    double s = anchor_s + static_cast<double>(k) * v * dt;
    if (!path.closed() && s > path.length()) {
      s = path.length();
      plan.truncated = true;
    }
    plan.poses.push_back(path.pose_at(s));
    plan.times.push_back(now + static_cast<double>(k) * dt);
  }
  return plan;
}

}  // namespace

ReferencePlan plan_leader(const TeachPath& path, const PathCoord& loc,
                          double fix_stamp, double v_des, int horizon,
                          double dt, double now) {
  if (v_des <= 0.0) {
    throw std::invalid_argument("plan_leader: v_des must be > 0");
  }
  if (horizon < 2) {
    throw std::invalid_argument("plan_leader: horizon must be >= 2");
  }
  double anchor = loc.s + v_des * (now - fix_stamp);
  if (!path.closed()) {
    anchor = std::min(anchor, path.length());
  }
  return plan_constant_velocity(path, anchor, v_des, horizon, dt, now);
}

double rollout_time_limit(const RolloutMessage& rollout) {
  const std::size_t n = rollout.times.size();
  const double step = n >= 2 ? rollout.times[n - 1] - rollout.times[n - 2]
                             : 0.0;
  return rollout.times[n - 1] + step;
}

std::vector<Pose2> interpolate_rollout(
    const RolloutMessage& rollout, const std::vector<double>& query_times) {
  if (rollout.poses.size() < 2 ||
      rollout.poses.size() != rollout.times.size()) {
    throw std::invalid_argument("interpolate_rollout: malformed rollout");
  }

  // Support sequence: the current fix leads the predicted poses.
  std::vector<Pose2> poses;
  std::vector<double> times;
  poses.reserve(rollout.poses.size() + 1);
  times.reserve(rollout.times.size() + 1);
  if (rollout.fix_stamp < rollout.times.front()) {
    poses.push_back(rollout.fix_pose);
    times.push_back(rollout.fix_stamp);
  }
  poses.insert(poses.end(), rollout.poses.begin(), rollout.poses.end());
  times.insert(times.end(), rollout.times.begin(), rollout.times.end());

  const double limit = rollout_time_limit(rollout);
  const std::size_t n = times.size();

  std::vector<Pose2> out;
  out.reserve(query_times.size());
  for (double t : query_times) {
    if (t < times.front() - 1e-9 || t > limit + 1e-9) {
      throw StaleRolloutError("interpolate_rollout: query time out of range");
    }
    if (t >= times[n - 1]) {
      // Constant-velocity extrapolation from the last two poses.
      const double span = times[n - 1] - times[n - 2];
      const double alpha = (t - times[n - 1]) / span;
      Twist2 delta = log_se2(compose(poses[n - 1], inverse(poses[n - 2])));
      delta.rho_x *= alpha;
      delta.rho_y *= alpha;
      delta.phi *= alpha;
      out.push_back(compose(exp_se2(delta), poses[n - 1]));
      continue;
    }
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t hi =
        std::clamp<std::size_t>(static_cast<std::size_t>(it - times.begin()),
                                1, n - 1);
    const std::size_t lo = hi - 1;
    const double span = times[hi] - times[lo];
    const double alpha =
        span > 0.0 ? std::clamp((t - times[lo]) / span, 0.0, 1.0) : 0.0;
    out.push_back(interpolate(poses[lo], poses[hi], alpha));
  }
  return out;
}

ReferencePlan plan_follower_distance_aware(
    const TeachPath& path, const std::vector<Pose2>& leader_poses,
    const std::vector<double>& times, double d_target, SpacingMode mode) {
  if (leader_poses.size() != times.size() || leader_poses.empty()) {
    throw std::invalid_argument(
        "plan_follower_distance_aware: pose/time size mismatch");
  }

  ReferencePlan plan;
  plan.poses.reserve(leader_poses.size());
  plan.times = times;

  double s_hint = -1.0;
  for (std::size_t k = 0; k < leader_poses.size(); ++k) {
    const PathCoord anchor =
        s_hint < 0.0 ? path.project(leader_poses[k])
                     : path.project_near(leader_poses[k], s_hint, 5.0);
    s_hint = anchor.s;

    double s_ref;
    if (mode == SpacingMode::kEuclidean) {
      const auto coord = path.offset_behind_euclidean(anchor, d_target);
      if (coord.has_value()) {
        s_ref = coord->s;
      } else {
        ++plan.euclidean_fallbacks;
        s_ref = anchor.s - d_target;
      }
    } else {
      s_ref = anchor.s - d_target;
    }
    if (!path.closed() && s_ref < 0.0) {
      // Underflow near the path start: pin the reference at s = 0.
      s_ref = 0.0;
      ++plan.euclidean_fallbacks;
    }
    if (k == 0) {
      plan.anchor_s = s_ref;
    }
    plan.poses.push_back(path.pose_at(s_ref));
  }
  return plan;
}

std::pair<double, PiState> pi_velocity(double e_dist, const PiState& pi,
                                       const PiGains& gains, double dt) {
  if (dt <= 0.0) {
    throw std::invalid_argument("pi_velocity: dt must be > 0");
  }
  const double cap = gains.v_max / gains.ki;
  PiState next;
  next.integral = std::clamp(pi.integral + e_dist * dt, -cap, cap);
  next.last_update = pi.last_update + dt;
  const double v_ref = std::clamp(gains.kp * e_dist + gains.ki * next.integral,
                                  gains.v_min, gains.v_max);
  return {v_ref, next};
}

ReferencePlan plan_follower_pi(const TeachPath& path, const PathCoord& loc,
                               double fix_stamp, double v_ref, int horizon,
                               double dt, double now) {
  if (horizon < 2) {
    throw std::invalid_argument("plan_follower_pi: horizon must be >= 2");
  }
  bool clamped = false;
  if (v_ref < 0.0) {
    v_ref = 0.0;  // no reversing followers
    clamped = true;
  }
  double anchor = loc.s + v_ref * (now - fix_stamp);
  if (!path.closed()) {
    anchor = std::min(anchor, path.length());
  }
  ReferencePlan plan =
      plan_constant_velocity(path, anchor, v_ref, horizon, dt, now);
  plan.velocity_clamped = clamped;
  return plan;
}

}  // namespace convoy
