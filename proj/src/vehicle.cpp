#include "convoy/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace convoy {

namespace {

constexpr double kIntegrationTol = 1e-8;  // m, absolute

struct RawPose {
  double x;
  double y;
  double theta;
};

RawPose rk4_step(const RawPose& p, double v, double omega, double h) {
  auto f = [&](const RawPose& q) {
    return RawPose{v * std::cos(q.theta), v * std::sin(q.theta), omega};
  };
  const RawPose k1 = f(p);
  const RawPose k2 = f({p.x + 0.5 * h * k1.x, p.y + 0.5 * h * k1.y,
                        p.theta + 0.5 * h * k1.theta});
  const RawPose k3 = f({p.x + 0.5 * h * k2.x, p.y + 0.5 * h * k2.y,
                        p.theta + 0.5 * h * k2.theta});
  const RawPose k4 =
      f({p.x + h * k3.x, p.y + h * k3.y, p.theta + h * k3.theta});
  return RawPose{p.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
                 p.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
                 p.theta + h / 6.0 *
                               (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta +
                                k4.theta)};
}

// One adaptive interval: compares a full step against two half steps and
// recurses until the Richardson error estimate is below tolerance.
RawPose integrate_adaptive(const RawPose& p, double v, double omega, double h,
                           int depth) {
  const RawPose full = rk4_step(p, v, omega, h);
  const RawPose half1 = rk4_step(p, v, omega, 0.5 * h);
  const RawPose half2 = rk4_step(half1, v, omega, 0.5 * h);
  const double err = std::max({std::abs(full.x - half2.x),
                               std::abs(full.y - half2.y),
                               std::abs(full.theta - half2.theta)}) /
                     15.0;
  if (err < kIntegrationTol || depth >= 20) {
    return half2;
  }
  const RawPose mid = integrate_adaptive(p, v, omega, 0.5 * h, depth + 1);
  return integrate_adaptive(mid, v, omega, 0.5 * h, depth + 1);
}

}  // namespace

void VehicleParams::validate() const {
  if (wheelbase <= 0.0) {
    throw std::invalid_argument("VehicleParams: wheelbase must be > 0");
  }
  if (v_min > 0.0 || v_max < 0.0) {
    throw std::invalid_argument("VehicleParams: need v_min <= 0 <= v_max");
  }
  if (delta_max <= 0.0 || delta_min != -delta_max ||
      delta_max >= M_PI / 2.0) {
    throw std::invalid_argument(
        "VehicleParams: delta bounds must be symmetric and < pi/2");
  }
  if (dv_max <= 0.0 || ddelta_max <= 0.0) {
    throw std::invalid_argument("VehicleParams: rate limits must be > 0");
  }
  if (actuator_tau < 0.0) {
    throw std::invalid_argument("VehicleParams: actuator_tau must be >= 0");
  }
}

PoseRate ode(const Pose2& pose, const ControlInput& u,
             const VehicleParams& params) {
  if (std::abs(u.delta) >= M_PI / 2.0) {
    throw std::invalid_argument("ode: |delta| must be < pi/2");
  }
  return PoseRate{u.v * std::cos(pose.theta), u.v * std::sin(pose.theta),
                  u.v / params.wheelbase * std::tan(u.delta)};
}

ControlInput clamp_to_box(const ControlInput& u, const VehicleParams& params) {
  return ControlInput{std::clamp(u.v, params.v_min, params.v_max),
                      std::clamp(u.delta, params.delta_min, params.delta_max)};
}

ControlInput apply_lag(const ControlInput& u_act, const ControlInput& u_cmd,
                       double dt, double tau) {
  if (tau <= 0.0) {
    return u_cmd;
  }
  const double decay = std::exp(-dt / tau);
  return ControlInput{u_cmd.v + (u_act.v - u_cmd.v) * decay,
                      u_cmd.delta + (u_act.delta - u_cmd.delta) * decay};
}

VehicleState step(const VehicleState& state, const ControlInput& u_cmd,
                  double dt, const VehicleParams& params) {
  if (dt <= 0.0) {
    throw std::invalid_argument("step: dt must be > 0");
  }
  const ControlInput clamped = clamp_to_box(u_cmd, params);
  const ControlInput u_act =
      apply_lag(state.u_act, clamped, dt, params.actuator_tau);

  const double omega =
      u_act.v / params.wheelbase * std::tan(u_act.delta);
  const RawPose start{state.pose.x, state.pose.y, state.pose.theta};
  const RawPose end = integrate_adaptive(start, u_act.v, omega, dt, 0);

  VehicleState next;
  next.pose = Pose2(end.x, end.y, end.theta);
  next.u_act = u_act;
  return next;
}

}  // namespace convoy
