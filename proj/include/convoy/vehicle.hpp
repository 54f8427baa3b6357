#pragma once

#include "convoy/geometry.hpp"

namespace convoy {

/// Forward velocity and steering angle command pair.
struct ControlInput {
  double v{0.0};
  double delta{0.0};
};

/// Kinematic and actuation limits of one Ackermann vehicle. Rate limits are
/// per control period.
struct VehicleParams {
  double wheelbase{0.65};      // m
  double v_min{-1.5};          // m/s
  double v_max{1.5};           // m/s
  double delta_min{-0.46};     // rad
  double delta_max{0.46};      // rad
  double dv_max{0.15};         // m/s per control period
  double ddelta_max{0.15};     // rad per control period
  double actuator_tau{0.15};   // s, first-order lag time constant

  void validate() const;
};

/// Ground-truth plant state: pose plus the lagged actuator output.
struct VehicleState {
  Pose2 pose;
  ControlInput u_act;
};

/// Time derivative (x_dot, y_dot, theta_dot) of the pose.
struct PoseRate {
  double x_dot{0.0};
  double y_dot{0.0};
  double theta_dot{0.0};
};

/// Kinematic bicycle ODE: x_dot = v cos(theta), y_dot = v sin(theta),
/// theta_dot = (v / L) tan(delta). Throws std::invalid_argument when
/// |delta| >= pi/2.
PoseRate ode(const Pose2& pose, const ControlInput& u,
             const VehicleParams& params);

/// Clamps a command to the velocity and steering boxes.
ControlInput clamp_to_box(const ControlInput& u, const VehicleParams& params);

/// Exact discretization of the first-order actuator lag over dt
/// (tau = 0 reduces to pass-through).
ControlInput apply_lag(const ControlInput& u_act, const ControlInput& u_cmd,
                       double dt, double tau);

/// Advances the plant by dt: clamps the command, updates the lag state, and
/// integrates the pose with step-halving RK4 to 1e-8 absolute tolerance while
/// u_act is held constant.
VehicleState step(const VehicleState& state, const ControlInput& u_cmd,
                  double dt, const VehicleParams& params);

}  // namespace convoy
