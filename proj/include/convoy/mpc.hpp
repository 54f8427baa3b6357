#pragma once

#include <array>
#include <vector>

#include "convoy/path.hpp"
#include "convoy/vehicle.hpp"

namespace convoy {
namespace mpc {

/// Diagonal weights of the quadratic cost terms. These multiply the
/// residuals directly (the inverse matrices of the usual covariance-style
/// weighting). Positive definiteness reduces to positivity of the entries.
struct CostWeights {
  std::array<double, 3> w_ref{60.0, 60.0, 20.0};  // lon, lat, heading
  std::array<double, 2> w_cont{0.2, 0.2};         // v, delta
  std::array<double, 2> w_acc{4.0, 4.0};          // dv, ddelta
  double w_dist{150.0};

  void validate() const;
};

enum class Variant {
  kLeader,
  kFollowerDistributed,
  kCentralized,
  kFollowerPiConstrained,
};

/// One horizon-K nonlinear program. Single-vehicle variants use slot 0
/// only; the centralized variant uses slot 0 for the leader and slot 1 for
/// the follower.
struct Problem {
  Variant variant{Variant::kLeader};
  int horizon{15};
  double dt{0.25};

  const TeachPath* path{nullptr};
  double corridor_half_width{0.5};
  CostWeights weights;

  double d_min{0.8};
  double d_target{1.5};
  double d_max{3.0};
  double v_ref{0.0};  // FollowerPiConstrained equality value

  int n_vehicles{1};
  std::array<VehicleParams, 2> vehicle{};
  std::array<VehicleState, 2> initial{};
  std::array<ControlInput, 2> u_prev{};
  std::array<std::vector<Pose2>, 2> refs{};

  // Fixed leader poses at the reference times; FollowerDistributed only.
  std::vector<Pose2> leader_traj;

  void validate() const;
};

struct CostBreakdown {
  double j_ref{0.0};
  double j_cont{0.0};
  double j_acc{0.0};
  double j_dist{0.0};
  double total() const { return j_ref + j_cont + j_acc + j_dist; }
};

struct Solution {
  std::vector<std::vector<Pose2>> states;         // [vehicle][k]
  std::vector<std::vector<ControlInput>> inputs;  // [vehicle][k]
  CostBreakdown costs;
  double kkt_residual{0.0};
  double constraint_violation_max{0.0};
  int iterations{0};
  bool converged{false};
  std::vector<double> merit_history;  // accepted merit values per iterate
};

/// Per-term costs of one vehicle's trajectory. leader_traj, when non-null,
/// supplies the fixed leader positions for the inter-robot distance term.
/// u_prev seeds the first acceleration difference.
CostBreakdown eval_costs(const std::vector<Pose2>& states,
                         const std::vector<ControlInput>& inputs,
                         const std::vector<Pose2>& refs,
                         const CostWeights& weights,
                         const ControlInput& u_prev,
                         const std::vector<Pose2>* leader_traj,
                         double d_target);

/// Inter-robot distance cost on two position sequences.
double eval_dist_cost(const std::vector<Pose2>& leader_states,
                      const std::vector<Pose2>& follower_states,
                      double w_dist, double d_target);

/// Receding-horizon warm start: drop the first step, repeat the last.
Solution warm_shift(const Solution& previous);

/// Solves the program by projected Gauss-Newton on the residual form, with
/// exterior quadratic penalties for the corridor and distance inequalities.
/// Box and rate constraints hold exactly on every returned iterate. Returns
/// the best iterate even when not converged. Throws std::runtime_error when
/// the initial guess has non-finite cost or the initial state is outside
/// the corridor plus 1 m slack.
Solution solve(const Problem& problem, const Solution* warm_start = nullptr);

// Decision-vector view used by the finite-difference checks: the packed
// layout is all decision inputs of vehicle 0 then vehicle 1; the
// PI-constrained variant exposes only the steering angles.
int num_decision_vars(const Problem& problem);
std::vector<double> pack_inputs(
    const Problem& problem,
    const std::vector<std::vector<ControlInput>>& inputs);
std::vector<std::vector<ControlInput>> unpack_inputs(
    const Problem& problem, const std::vector<double>& z);

/// Total smooth cost (no penalties) as a function of the decision vector;
/// states come from the single-shooting rollout.
double cost_value(const Problem& problem, const std::vector<double>& z);

/// Analytic gradient of cost_value.
std::vector<double> cost_gradient(const Problem& problem,
                                  const std::vector<double>& z);

}  // namespace mpc
}  // namespace convoy
