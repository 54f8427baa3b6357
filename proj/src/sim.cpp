#include "convoy/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>

#include "convoy/mpc.hpp"
#include "convoy/planner.hpp"

namespace convoy {

namespace {

// Seed stream ids; fixed per consumer so adding robots or links never
// perturbs existing streams.
constexpr std::uint64_t kStreamLocalization = 1000;
constexpr std::uint64_t kStreamRangeSensor = 2000;
constexpr std::uint64_t kStreamForwardLink = 3000;
constexpr std::uint64_t kStreamReverseLink = 4000;

constexpr double kAbortSlack = 0.5;  // m beyond the corridor

struct RobotRuntime {
  RobotConfig cfg;
  VehicleParams mpc_params;  // constraint set seen by the controller
  VehicleState state;        // ground truth
  RandomStream loc_rng;
  RandomStream range_rng;

  Pose2 est_pose;          // latest localization fix
  double est_stamp{0.0};
  PathCoord est_coord;     // fix projected onto the path
  ControlInput u_cmd;      // command currently applied
  ControlInput u_act_est;  // controller-side lag estimate

  std::optional<mpc::Solution> warm;
  PiState pi;
  double last_v_ref{0.0};
  std::optional<RolloutMessage> rollout;
  std::optional<FixMessage> src_fix;

  int source{0};             // robot this one follows
  double target_distance{0.0};
  double s_hint{0.0};

  RobotRuntime(const RobotConfig& rc, std::uint64_t seed, int index)
      : cfg(rc),
        mpc_params(rc.params),
        loc_rng(seed, kStreamLocalization + static_cast<std::uint64_t>(index)),
        range_rng(seed, kStreamRangeSensor + static_cast<std::uint64_t>(index)) {}
};

class Engine {
 public:
  Engine(const ConvoyConfig& config, std::uint64_t seed)
      : config_(config), seed_(seed), path_(build_path(config)) {}

  RunResult run();

 private:
  void init_robots();
  void control_cycle(double now);
  void leader_cycle(double now);
  void follower_cycle(int i, double now);
  void cmpc_leader_cycle(double now);
  void apply_command(int i, const mpc::Solution& sol, double now);
  void hold_command(int i);
  double arc_gap(double s_front, double s_back) const;
  mpc::Problem base_problem(int i) const;
  void log_tick(double now);

  ConvoyConfig config_;
  std::uint64_t seed_;
  TeachPath path_;
  std::vector<RobotRuntime> robots_;

  // Forward link i carries source -> follower i traffic; the reverse link
  // returns follower state for the centralized solver.
  std::vector<std::unique_ptr<Channel<RolloutMessage>>> rollout_links_;
  std::vector<std::unique_ptr<Channel<FixMessage>>> fix_links_;
  std::vector<std::unique_ptr<Channel<InputMessage>>> input_links_;
  std::vector<std::unique_ptr<Channel<FixMessage>>> reverse_links_;

  TrajectoryLog log_;
  std::uint32_t tick_flags_{0};
  double leader_travel_{0.0};
  Pose2 last_leader_pos_;
  bool aborted_{false};
  std::string abort_reason_;
};

void Engine::init_robots() {
  const int n = static_cast<int>(config_.robots.size());
  robots_.reserve(n);
  for (int i = 0; i < n; ++i) {
    robots_.emplace_back(config_.robots[i], seed_, i);
    RobotRuntime& r = robots_.back();
    const auto& ov = config_.mpc_overrides;
    if (ov.v_min) r.mpc_params.v_min = *ov.v_min;
    if (ov.v_max) r.mpc_params.v_max = *ov.v_max;
    if (ov.delta_min) r.mpc_params.delta_min = *ov.delta_min;
    if (ov.delta_max) r.mpc_params.delta_max = *ov.delta_max;
    if (ov.dv_max) r.mpc_params.dv_max = *ov.dv_max;
    if (ov.ddelta_max) r.mpc_params.ddelta_max = *ov.ddelta_max;
    if (ov.actuator_tau) r.mpc_params.actuator_tau = *ov.actuator_tau;
    if (ov.wheelbase) r.mpc_params.wheelbase = *ov.wheelbase;

    if (config_.topology == Topology::kStar) {
      r.source = 0;
      r.target_distance = config_.d_target * i;
    } else {
      r.source = i - 1;
      r.target_distance = config_.d_target;
    }
  }

  // Initial placement: the leader starts far enough along the path that
  // every follower fits behind it at its target gap; followers are placed
  // by the same offset rule the planners use.
  double s_leader = 1.5 * config_.d_target * (n - 1);
  if (!path_.closed()) {
    s_leader = std::min(s_leader, path_.length());
  }
  robots_[0].state.pose = path_.pose_at(s_leader);
  robots_[0].s_hint = s_leader;
  for (int i = 1; i < n; ++i) {
    const PathCoord anchor{robots_[i - 1].s_hint, 0.0, 0.0};
    double s;
    if (config_.spacing_mode == SpacingMode::kEuclidean) {
      const auto coord = path_.offset_behind_euclidean(anchor, config_.d_target);
      s = coord.has_value() ? coord->s : anchor.s - config_.d_target;
    } else {
      s = anchor.s - config_.d_target;
    }
    if (!path_.closed()) s = std::max(s, 0.0);
    robots_[i].state.pose = path_.pose_at(s);
    robots_[i].s_hint = s;
  }
  for (RobotRuntime& r : robots_) {
    r.est_pose = r.state.pose;
    r.est_coord = PathCoord{r.s_hint, 0.0, 0.0};
    last_leader_pos_ = robots_[0].state.pose;
  }

  // Channels per follower; all constructed so link seeds stay stable across
  // controller choices.
  for (int i = 0; i < n; ++i) {
    const auto id = static_cast<std::uint64_t>(i);
    rollout_links_.push_back(std::make_unique<Channel<RolloutMessage>>(
        config_.channel, seed_, kStreamForwardLink + id));
    fix_links_.push_back(std::make_unique<Channel<FixMessage>>(
        config_.channel, seed_, kStreamForwardLink + id));
    input_links_.push_back(std::make_unique<Channel<InputMessage>>(
        config_.channel, seed_, kStreamForwardLink + id));
    reverse_links_.push_back(std::make_unique<Channel<FixMessage>>(
        config_.channel, seed_, kStreamReverseLink + id));
  }
}

mpc::Problem Engine::base_problem(int i) const {
  const RobotRuntime& r = robots_[i];
  mpc::Problem p;
  p.horizon = config_.horizon;
  p.dt = config_.horizon_dt;
  p.path = &path_;
  p.corridor_half_width = config_.corridor_half_width;
  p.weights = config_.weights;
  p.d_min = config_.d_min;
  p.d_target = r.target_distance > 0.0 ? r.target_distance : config_.d_target;
  p.d_max = config_.d_max + std::max(0.0, p.d_target - config_.d_target);
  p.vehicle[0] = r.mpc_params;
  p.initial[0] = VehicleState{r.est_pose, r.u_act_est};
  p.u_prev[0] = r.u_cmd;
  return p;
}

void Engine::apply_command(int i, const mpc::Solution& sol, double now) {
  RobotRuntime& r = robots_[i];
  r.warm = sol;
  if (!sol.converged) {
    ++log_.nonconverged_solves;
    tick_flags_ |= kFlagSolverNotConverged;
    hold_command(i);
    return;
  }
  ControlInput u = sol.inputs[0][0];
  const ControlInput clamped = clamp_to_box(u, r.cfg.params);
  if (clamped.v != u.v || clamped.delta != u.delta) {
    ++log_.clamp_events;
    tick_flags_ |= kFlagInputClamped;
  }
  r.u_cmd = clamped;
  // Controller-side actuator estimate advances by one control period.
  r.u_act_est = apply_lag(r.u_act_est, r.u_cmd, 1.0 / config_.control_rate_hz,
                          r.mpc_params.actuator_tau);
  (void)now;
}

void Engine::hold_command(int i) {
  RobotRuntime& r = robots_[i];
  ++log_.hold_events;
  r.u_act_est = apply_lag(r.u_act_est, r.u_cmd, 1.0 / config_.control_rate_hz,
                          r.mpc_params.actuator_tau);
}

double Engine::arc_gap(double s_front, double s_back) const {
  double d = s_front - s_back;
  if (path_.closed()) {
    d = std::fmod(d, path_.length());
    if (d < -0.5 * path_.length()) d += path_.length();
    if (d > 0.5 * path_.length()) d -= path_.length();
  }
  return d;
}

void Engine::leader_cycle(double now) {
  if (config_.controller == ControllerKind::kCmpc) {
    cmpc_leader_cycle(now);
    return;
  }

  RobotRuntime& r = robots_[0];
  ReferencePlan plan = plan_leader(path_, r.est_coord, r.est_stamp,
                                   config_.v_des, config_.horizon,
                                   config_.horizon_dt, now);
  if (plan.truncated) tick_flags_ |= kFlagPlanTruncated;

  mpc::Problem p = base_problem(0);
  p.variant = mpc::Variant::kLeader;
  p.refs[0] = plan.poses;

  try {
    mpc::Solution warm;
    const mpc::Solution* warm_ptr = nullptr;
    if (r.warm.has_value()) {
      warm = mpc::warm_shift(*r.warm);
      warm_ptr = &warm;
    }
    const mpc::Solution sol = mpc::solve(p, warm_ptr);
    apply_command(0, sol, now);

    // Publish to the followers that track this robot.
    for (std::size_t i = 1; i < robots_.size(); ++i) {
      if (robots_[i].source != 0) continue;
      if (config_.controller == ControllerKind::kDmpc) {
        RolloutMessage msg;
        msg.sender = 0;
        msg.stamp = now;
        msg.poses = sol.states[0];
        msg.times = plan.times;
        msg.fix_pose = r.est_pose;
        msg.fix_stamp = r.est_stamp;
        rollout_links_[i]->send(msg, now);
      } else if (config_.controller == ControllerKind::kPiLoc) {
        fix_links_[i]->send(
            FixMessage{0, now, r.est_pose, r.u_act_est, r.u_cmd}, now);
      }
    }
  } catch (const std::exception&) {
    tick_flags_ |= kFlagSolverNotConverged;
    ++log_.nonconverged_solves;
    hold_command(0);
  }
}

void Engine::cmpc_leader_cycle(double now) {
  RobotRuntime& leader = robots_[0];
  // Freshest follower state from the reverse link.
  for (const FixMessage& m : reverse_links_[1]->poll(now)) {
    if (!leader.src_fix.has_value() || m.stamp >= leader.src_fix->stamp) {
      leader.src_fix = m;
    }
  }

  ReferencePlan plan = plan_leader(path_, leader.est_coord, leader.est_stamp,
                                   config_.v_des, config_.horizon,
                                   config_.horizon_dt, now);
  if (plan.truncated) tick_flags_ |= kFlagPlanTruncated;

  if (!leader.src_fix.has_value()) {
    // No follower state yet: fall back to a solo leader solve.
    tick_flags_ |= kFlagNoMessageHold;
    mpc::Problem p = base_problem(0);
    p.variant = mpc::Variant::kLeader;
    p.refs[0] = plan.poses;
    try {
      const mpc::Solution sol = mpc::solve(p);
      apply_command(0, sol, now);
    } catch (const std::exception&) {
      tick_flags_ |= kFlagSolverNotConverged;
      ++log_.nonconverged_solves;
      hold_command(0);
    }
    return;
  }

  // The follower references hang off the leader references, since the
  // leader trajectory is itself a decision variable here.
  ReferencePlan follower_plan = plan_follower_distance_aware(
      path_, plan.poses, plan.times, config_.d_target, config_.spacing_mode);
  log_.fallback_events += follower_plan.euclidean_fallbacks;
  if (follower_plan.euclidean_fallbacks > 0) {
    tick_flags_ |= kFlagEuclideanFallback;
  }

  mpc::Problem p = base_problem(0);
  p.variant = mpc::Variant::kCentralized;
  p.n_vehicles = 2;
  p.refs[0] = plan.poses;
  p.vehicle[1] = robots_[1].mpc_params;
  p.initial[1] = VehicleState{leader.src_fix->pose, leader.src_fix->u_act};
  p.u_prev[1] = leader.src_fix->u_prev;
  p.refs[1] = follower_plan.poses;
  p.d_target = config_.d_target;
  p.d_max = config_.d_max;

  try {
    mpc::Solution warm;
    const mpc::Solution* warm_ptr = nullptr;
    if (leader.warm.has_value() &&
        leader.warm->inputs.size() == 2) {
      warm = mpc::warm_shift(*leader.warm);
      warm_ptr = &warm;
    }
    const mpc::Solution sol = mpc::solve(p, warm_ptr);
    apply_command(0, sol, now);
    if (sol.converged) {
      input_links_[1]->send(InputMessage{now, sol.inputs[1][0]}, now);
    }
  } catch (const std::exception&) {
    tick_flags_ |= kFlagSolverNotConverged;
    ++log_.nonconverged_solves;
    hold_command(0);
  }
}

void Engine::follower_cycle(int i, double now) {
  RobotRuntime& r = robots_[i];
  const double control_period = 1.0 / config_.control_rate_hz;

  switch (config_.controller) {
    case ControllerKind::kDmpc: {
      for (const RolloutMessage& m : rollout_links_[i]->poll(now)) {
        if (!r.rollout.has_value() || m.stamp >= r.rollout->stamp) {
          r.rollout = m;  // only the freshest rollout is kept
        }
      }
      if (!r.rollout.has_value()) {
        tick_flags_ |= kFlagNoMessageHold;
        hold_command(i);
        return;
      }

      std::vector<double> times(config_.horizon);
      std::vector<double> query(config_.horizon);
      const double limit = rollout_time_limit(*r.rollout);
      bool stale = false;
      for (int k = 0; k < config_.horizon; ++k) {
        times[k] = now + (k + 1) * config_.horizon_dt;
        query[k] = times[k];
        if (query[k] > limit) {
          query[k] = limit;
          stale = true;
        }
      }
      if (stale) {
        ++log_.stale_rollouts;
        tick_flags_ |= kFlagStaleRollout;
      }

      std::vector<Pose2> leader_poses;
      try {
        leader_poses = interpolate_rollout(*r.rollout, query);
      } catch (const StaleRolloutError&) {
        tick_flags_ |= kFlagStaleRollout;
        ++log_.stale_rollouts;
        hold_command(i);
        return;
      }

      ReferencePlan plan = plan_follower_distance_aware(
          path_, leader_poses, times, r.target_distance, config_.spacing_mode);
      log_.fallback_events += plan.euclidean_fallbacks;
      if (plan.euclidean_fallbacks > 0) tick_flags_ |= kFlagEuclideanFallback;

      mpc::Problem p = base_problem(i);
      p.variant = mpc::Variant::kFollowerDistributed;
      p.refs[0] = plan.poses;
      p.leader_traj = leader_poses;

      try {
        mpc::Solution warm;
        const mpc::Solution* warm_ptr = nullptr;
        if (r.warm.has_value()) {
          warm = mpc::warm_shift(*r.warm);
          warm_ptr = &warm;
        }
        const mpc::Solution sol = mpc::solve(p, warm_ptr);
        apply_command(i, sol, now);

        // Chained followers subscribe to this robot's rollout.
        for (std::size_t k = 1; k < robots_.size(); ++k) {
          if (robots_[k].source != i) continue;
          RolloutMessage msg;
          msg.sender = i;
          msg.stamp = now;
          msg.poses = sol.states[0];
          msg.times = times;
          msg.fix_pose = r.est_pose;
          msg.fix_stamp = r.est_stamp;
          rollout_links_[k]->send(msg, now);
        }
      } catch (const std::exception&) {
        tick_flags_ |= kFlagSolverNotConverged;
        ++log_.nonconverged_solves;
        hold_command(i);
      }
      return;
    }

    case ControllerKind::kCmpc: {
      // Publish own state for the central solver, then apply the freshest
      // centrally computed input.
      reverse_links_[i]->send(
          FixMessage{i, now, r.est_pose, r.u_act_est, r.u_cmd}, now);
      std::optional<InputMessage> latest;
      for (const InputMessage& m : input_links_[i]->poll(now)) {
        if (!latest.has_value() || m.stamp >= latest->stamp) latest = m;
      }
      if (!latest.has_value()) {
        tick_flags_ |= kFlagNoMessageHold;
        hold_command(i);
        return;
      }
      const ControlInput clamped = clamp_to_box(latest->u, r.cfg.params);
      if (clamped.v != latest->u.v || clamped.delta != latest->u.delta) {
        ++log_.clamp_events;
        tick_flags_ |= kFlagInputClamped;
      }
      r.u_cmd = clamped;
      r.u_act_est = apply_lag(r.u_act_est, r.u_cmd, control_period,
                              r.mpc_params.actuator_tau);
      return;
    }

    case ControllerKind::kPiLoc:
    case ControllerKind::kPiReflec: {
      double v_ref = r.last_v_ref;
      bool have_error = false;
      double e_dist = 0.0;

      if (config_.controller == ControllerKind::kPiLoc) {
        for (const FixMessage& m : fix_links_[i]->poll(now)) {
          if (!r.src_fix.has_value() || m.stamp >= r.src_fix->stamp) {
            r.src_fix = m;
          }
        }
        if (r.src_fix.has_value()) {
          if (config_.spacing_mode == SpacingMode::kEuclidean) {
            const double gap = std::hypot(r.src_fix->pose.x - r.est_pose.x,
                                          r.src_fix->pose.y - r.est_pose.y);
            e_dist = gap - r.target_distance;
          } else {
            const PathCoord src = path_.project_near(
                r.src_fix->pose, r.est_coord.s + r.target_distance, 10.0);
            e_dist = arc_gap(src.s, r.est_coord.s) - r.target_distance;
          }
          have_error = true;
        } else {
          tick_flags_ |= kFlagNoMessageHold;
        }
      } else {
        const RangeMeasurement m =
            measure_range(robots_[r.source].state.pose, r.state.pose,
                          config_.range_sensor, now, r.range_rng);
        if (m.valid) {
          e_dist = m.distance - r.target_distance;
          have_error = true;
        } else {
          tick_flags_ |= kFlagRangeInvalid;
        }
      }

      if (have_error) {
        const auto [v, pi_next] =
            pi_velocity(e_dist, r.pi, config_.pi, control_period);
        r.pi = pi_next;
        v_ref = v;
        r.last_v_ref = v;
      }

      ReferencePlan plan =
          plan_follower_pi(path_, r.est_coord, r.est_stamp, v_ref,
                           config_.horizon, config_.horizon_dt, now);
      if (plan.truncated) tick_flags_ |= kFlagPlanTruncated;

      mpc::Problem p = base_problem(i);
      p.variant = mpc::Variant::kFollowerPiConstrained;
      p.v_ref = std::max(0.0, v_ref);
      p.refs[0] = plan.poses;

      try {
        mpc::Solution warm;
        const mpc::Solution* warm_ptr = nullptr;
        if (r.warm.has_value()) {
          warm = mpc::warm_shift(*r.warm);
          warm_ptr = &warm;
        }
        const mpc::Solution sol = mpc::solve(p, warm_ptr);
        apply_command(i, sol, now);
      } catch (const std::exception&) {
        tick_flags_ |= kFlagSolverNotConverged;
        ++log_.nonconverged_solves;
        hold_command(i);
      }
      return;
    }
  }
}

void Engine::control_cycle(double now) {
  // Phase 1: every robot localizes.
  for (RobotRuntime& r : robots_) {
    r.est_pose = localize(r.state.pose, r.cfg.noise_std, r.cfg.bias, r.loc_rng);
    r.est_stamp = now;
    r.est_coord = path_.project_near(r.est_pose, r.s_hint, 5.0);
  }

  // Phase 2: the centralized follower ships its state first so a zero-delay
  // channel serves the same-cycle solve.
  if (config_.controller == ControllerKind::kCmpc && robots_.size() == 2) {
    follower_cycle(1, now);
    leader_cycle(now);
    // Re-poll: with zero delay the input computed this cycle is available.
    RobotRuntime& f = robots_[1];
    std::optional<InputMessage> latest;
    for (const InputMessage& m : input_links_[1]->poll(now)) {
      if (!latest.has_value() || m.stamp >= latest->stamp) latest = m;
    }
    if (latest.has_value()) {
      f.u_cmd = clamp_to_box(latest->u, f.cfg.params);
    }
    return;
  }

  leader_cycle(now);
  for (std::size_t i = 1; i < robots_.size(); ++i) {
    follower_cycle(static_cast<int>(i), now);
  }
}

void Engine::log_tick(double now) {
  LogRow row;
  row.time = now;
  row.flags = tick_flags_;
  row.robots.resize(robots_.size());

  // Disturbance: forced slowdown overrides the applied command.
  const DisturbanceConfig& d = config_.disturbance;
  for (std::size_t i = 0; i < robots_.size(); ++i) {
    RobotRuntime& r = robots_[i];
    if (static_cast<int>(i) == d.robot && now >= d.start_s &&
        now < d.start_s + d.duration_s) {
      r.u_cmd.v = 0.0;
      row.flags |= kFlagDisturbanceActive;
    }
  }

  leader_travel_ += std::hypot(robots_[0].state.pose.x - last_leader_pos_.x,
                               robots_[0].state.pose.y - last_leader_pos_.y);
  last_leader_pos_ = robots_[0].state.pose;
  row.leader_travel = leader_travel_;

  for (std::size_t i = 0; i < robots_.size(); ++i) {
    RobotRuntime& r = robots_[i];
    const PathCoord c = path_.project_near(r.state.pose, r.s_hint, 5.0);
    r.s_hint = c.s;
    RobotSample& s = row.robots[i];
    s.true_pose = r.state.pose;
    s.est_pose = r.est_pose;
    s.u_cmd = r.u_cmd;
    s.u_act = r.state.u_act;
    s.lat_err = c.lateral;
    s.s = c.s;
  }
  for (std::size_t j = 0; j + 1 < robots_.size(); ++j) {
    const Pose2& front = row.robots[j].true_pose;
    const Pose2& back = row.robots[j + 1].true_pose;
    row.chord_gaps.push_back(std::hypot(front.x - back.x, front.y - back.y));
    row.arc_gaps.push_back(arc_gap(row.robots[j].s, row.robots[j + 1].s));
  }

  // Coupling and corridor checks on the true state.
  for (double gap : row.chord_gaps) {
    if (std::abs(gap - config_.d_target) > config_.coupling_travel) {
      row.flags |= kFlagCouplingViolation;
    }
  }
  for (std::size_t i = 0; i < robots_.size(); ++i) {
    if (std::abs(row.robots[i].lat_err) >
        config_.corridor_half_width + kAbortSlack) {
      aborted_ = true;
      std::ostringstream reason;
      reason << "robot " << i << " left the corridor at t=" << now
             << " (lateral " << row.robots[i].lat_err << " m)";
      abort_reason_ = reason.str();
    }
  }

  log_.rows.push_back(std::move(row));
  tick_flags_ = 0;
}

RunResult Engine::run() {
  const auto wall_start = std::chrono::steady_clock::now();

  config_.validate();
  init_robots();

  log_.n_robots = static_cast<int>(robots_.size());
  log_.sim_dt = config_.sim_dt;

  const auto ticks_per_control = static_cast<std::uint64_t>(
      std::llround(1.0 / (config_.control_rate_hz * config_.sim_dt)));

  double max_duration = config_.duration_s;
  const bool lap_mode = config_.laps > 0;
  if (lap_mode) {
    const double lap_distance = config_.laps * path_.length();
    // Generous cap; the loop exits on traveled distance.
    max_duration = 3.0 * lap_distance / config_.v_des + 30.0;
  }
  const auto n_ticks =
      static_cast<std::uint64_t>(std::llround(max_duration / config_.sim_dt));
  const double lap_distance = config_.laps * path_.length();

  std::uint64_t tick = 0;
  for (; tick < n_ticks; ++tick) {
    const double now = static_cast<double>(tick) * config_.sim_dt;
    if (tick % ticks_per_control == 0) {
      control_cycle(now);
    }
    log_tick(now);
    if (aborted_) break;
    if (lap_mode && leader_travel_ >= lap_distance) break;

    for (RobotRuntime& r : robots_) {
      r.state = step(r.state, r.u_cmd, config_.sim_dt, r.cfg.params);
    }
  }

  for (const auto& link : rollout_links_) {
    log_.dropped_messages += link->dropped_count();
  }
  for (const auto& link : fix_links_) {
    log_.dropped_messages += link->dropped_count();
  }
  for (const auto& link : input_links_) {
    log_.dropped_messages += link->dropped_count();
  }
  for (const auto& link : reverse_links_) {
    log_.dropped_messages += link->dropped_count();
  }

  RunResult result;
  result.aborted = aborted_;
  result.abort_reason = abort_reason_;
  result.sim_duration_s = log_.rows.empty() ? 0.0 : log_.rows.back().time;
  result.metrics = compute_metrics(log_, config_.d_target,
                                   config_.spacing_mode,
                                   config_.coupling_travel);
  result.metrics.aborted = aborted_;
  result.log = std::move(log_);

  const auto wall_end = std::chrono::steady_clock::now();
  result.wall_seconds =
      std::chrono::duration<double>(wall_end - wall_start).count();
  return result;
}

}  // namespace

Pose2 localize(const Pose2& true_pose, double noise_std, const Pose2& bias,
               RandomStream& rng) {
  const double nx = rng.gaussian(noise_std);
  const double ny = rng.gaussian(noise_std);
  const double nth = rng.gaussian(noise_std);
  const Pose2 noisy(true_pose.x + nx, true_pose.y + ny, true_pose.theta + nth);
  return compose(noisy, bias);
}

TeachPath build_path(const ConvoyConfig& config) {
  if (config.use_waypoints) {
    return TeachPath::build(config.waypoints, config.corridor_half_width,
                            config.closed);
  }
  const ScenarioWaypoints sw =
      generate_scenario(config.scenario, config.scenario_params);
  return TeachPath::build(sw.waypoints, config.corridor_half_width, sw.closed);
}

RunResult run(const ConvoyConfig& config, std::uint64_t seed) {
  Engine engine(config, seed);
  return engine.run();
}

}  // namespace convoy
