#include "convoy/mpc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace convoy {
namespace mpc {

namespace {

constexpr double kKktTol = 1e-4;
constexpr double kStepTol = 1e-8;
constexpr double kViolationTol = 1e-6;
constexpr int kMaxIterations = 80;
constexpr int kMaxBacktracks = 20;
constexpr double kArmijoC = 1e-4;
constexpr double kPenaltyMu0 = 1e4;
constexpr int kOuterIterations = 3;
constexpr int kModelSubsteps = 2;
constexpr double kProjectionWindow = 5.0;  // m, corridor projection hint

struct RawPose {
  double x;
  double y;
  double theta;
};

using Matrix32 = Eigen::Matrix<double, 3, 2>;

// One fixed RK4 step of the bicycle model with optional Jacobians
// A = d(next)/d(pose) and B = d(next)/d(v, delta).
void bicycle_rk4(const RawPose& p, double v, double delta, double wheelbase,
                 double h, RawPose* next, Eigen::Matrix3d* A, Matrix32* B) {
  const double tan_d = std::tan(delta);
  const double omega_per_v = tan_d / wheelbase;
  const double dsec2 = v * (1.0 + tan_d * tan_d) / wheelbase;

  auto eval = [&](const RawPose& q, Eigen::Vector3d* k, Eigen::Matrix3d* fx,
                  Matrix32* fu) {
    const double c = std::cos(q.theta);
    const double s = std::sin(q.theta);
    (*k) << v * c, v * s, v * omega_per_v;
    if (fx != nullptr) {
      fx->setZero();
      (*fx)(0, 2) = -v * s;
      (*fx)(1, 2) = v * c;
    }
    if (fu != nullptr) {
      fu->setZero();
      (*fu)(0, 0) = c;
      (*fu)(1, 0) = s;
      (*fu)(2, 0) = omega_per_v;
      (*fu)(2, 1) = dsec2;
    }
  };

  const bool with_jac = A != nullptr;
  Eigen::Vector3d k1, k2, k3, k4;
  Eigen::Matrix3d fx1, fx2, fx3, fx4;
  Matrix32 fu1, fu2, fu3, fu4;

  eval(p, &k1, with_jac ? &fx1 : nullptr, with_jac ? &fu1 : nullptr);
  const RawPose p2{p.x + 0.5 * h * k1(0), p.y + 0.5 * h * k1(1),
                   p.theta + 0.5 * h * k1(2)};
  eval(p2, &k2, with_jac ? &fx2 : nullptr, with_jac ? &fu2 : nullptr);
  const RawPose p3{p.x + 0.5 * h * k2(0), p.y + 0.5 * h * k2(1),
                   p.theta + 0.5 * h * k2(2)};
  eval(p3, &k3, with_jac ? &fx3 : nullptr, with_jac ? &fu3 : nullptr);
  const RawPose p4{p.x + h * k3(0), p.y + h * k3(1), p.theta + h * k3(2)};
  eval(p4, &k4, with_jac ? &fx4 : nullptr, with_jac ? &fu4 : nullptr);

  next->x = p.x + h / 6.0 * (k1(0) + 2.0 * k2(0) + 2.0 * k3(0) + k4(0));
  next->y = p.y + h / 6.0 * (k1(1) + 2.0 * k2(1) + 2.0 * k3(1) + k4(1));
  next->theta = p.theta + h / 6.0 * (k1(2) + 2.0 * k2(2) + 2.0 * k3(2) + k4(2));

  if (with_jac) {
    const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
    const Eigen::Matrix3d K1x = fx1;
    const Matrix32 K1u = fu1;
    const Eigen::Matrix3d K2x = fx2 * (I + 0.5 * h * K1x);
    const Matrix32 K2u = fx2 * (0.5 * h * K1u) + fu2;
    const Eigen::Matrix3d K3x = fx3 * (I + 0.5 * h * K2x);
    const Matrix32 K3u = fx3 * (0.5 * h * K2u) + fu3;
    const Eigen::Matrix3d K4x = fx4 * (I + h * K3x);
    const Matrix32 K4u = fx4 * (h * K3u) + fu4;
    *A = I + h / 6.0 * (K1x + 2.0 * K2x + 2.0 * K3x + K4x);
    *B = h / 6.0 * (K1u + 2.0 * K2u + 2.0 * K3u + K4u);
  }
}

// Model step over one horizon interval: kModelSubsteps chained RK4 steps
// with u_act held constant.
void model_step(const RawPose& p, double v, double delta, double wheelbase,
                double dt, RawPose* next, Eigen::Matrix3d* A, Matrix32* B) {
  const double h = dt / kModelSubsteps;
  RawPose cur = p;
  Eigen::Matrix3d A_total = Eigen::Matrix3d::Identity();
  Matrix32 B_total = Matrix32::Zero();
  for (int i = 0; i < kModelSubsteps; ++i) {
    RawPose out;
    Eigen::Matrix3d A_sub;
    Matrix32 B_sub;
    bicycle_rk4(cur, v, delta, wheelbase, h, &out,
                A != nullptr ? &A_sub : nullptr,
                B != nullptr ? &B_sub : nullptr);
    if (A != nullptr) {
      A_total = A_sub * A_total;
      B_total = A_sub * B_total + B_sub;
    }
    cur = out;
  }
  *next = cur;
  if (A != nullptr) {
    *A = A_total;
    *B = B_total;
  }
}

int vars_per_vehicle(const Problem& p) {
  return p.variant == Variant::kFollowerPiConstrained ? p.horizon
                                                      : 2 * p.horizon;
}

// Jacobian of e = log(T_ref * T^-1) with respect to the (x, y, theta)
// coordinates of T.
Eigen::Matrix3d log_error_jacobian(const Pose2& ref, const Pose2& T) {
  const double phi = wrap_angle(ref.theta - T.theta);
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  Eigen::Matrix2d R_E;
  R_E << c, -s, s, c;
  const Eigen::Vector2d t_k(T.x, T.y);
  const Eigen::Vector2d t_E =
      Eigen::Vector2d(ref.x, ref.y) - R_E * t_k;

  double a, half;
  detail::vinv_coeffs(phi, &a, &half);
  Eigen::Matrix2d Vinv;
  Vinv << a, half, -half, a;
  const double da = detail::vinv_a_derivative(phi);
  Eigen::Matrix2d dVinv;
  dVinv << da, 0.5, -0.5, da;

  Eigen::Matrix2d Jrot;
  Jrot << 0.0, -1.0, 1.0, 0.0;

  Eigen::Matrix3d D = Eigen::Matrix3d::Zero();
  D.block<2, 2>(0, 0) = -(Vinv * R_E);
  D.block<2, 1>(0, 2) = -dVinv * t_E + Vinv * (Jrot * R_E * t_k);
  D(2, 2) = -1.0;
  return D;
}

struct VehicleRollout {
  std::vector<ControlInput> u_cmd;
  std::vector<ControlInput> u_act;
  std::vector<Pose2> states;
  // Sensitivities of (x, y, theta)_k with respect to the vehicle's own
  // decision variables.
  std::vector<Eigen::MatrixXd> S;
};

void rollout_vehicle(const Problem& problem, int v,
                     const std::vector<ControlInput>& inputs, bool with_sens,
                     VehicleRollout* out) {
  const int K = problem.horizon;
  const int n_own = vars_per_vehicle(problem);
  const VehicleParams& params = problem.vehicle[v];
  const bool pi = problem.variant == Variant::kFollowerPiConstrained;

  out->u_cmd = inputs;
  out->u_act.resize(K);
  out->states.resize(K);
  if (with_sens) out->S.assign(K, Eigen::MatrixXd::Zero(3, n_own));

  const double alpha = params.actuator_tau > 0.0
                           ? std::exp(-problem.dt / params.actuator_tau)
                           : 0.0;
  const double gain = 1.0 - alpha;

  // dU = d(u_act_k)/dz, maintained incrementally through the lag recursion.
  Eigen::MatrixXd dU;
  if (with_sens) dU = Eigen::MatrixXd::Zero(2, n_own);

  ControlInput u_act_prev = problem.initial[v].u_act;
  RawPose pose{problem.initial[v].pose.x, problem.initial[v].pose.y,
               problem.initial[v].pose.theta};
  Eigen::MatrixXd S_prev;
  if (with_sens) S_prev = Eigen::MatrixXd::Zero(3, n_own);

  for (int k = 0; k < K; ++k) {
    const ControlInput& u = inputs[k];
    ControlInput u_act{gain * u.v + alpha * u_act_prev.v,
                       gain * u.delta + alpha * u_act_prev.delta};
    if (params.actuator_tau <= 0.0) u_act = u;

    Eigen::Matrix3d A;
    Matrix32 B;
    RawPose next;
    model_step(pose, u_act.v, u_act.delta, params.wheelbase, problem.dt,
               &next, with_sens ? &A : nullptr, with_sens ? &B : nullptr);

    if (with_sens) {
      dU *= alpha;
      if (pi) {
        dU(1, k) += gain;  // only delta is a decision variable
      } else {
        dU(0, 2 * k) += gain;
        dU(1, 2 * k + 1) += gain;
      }
      out->S[k].noalias() = A * S_prev + B * dU;
      S_prev = out->S[k];
    }

    out->u_act[k] = u_act;
    out->states[k] = Pose2(next.x, next.y, next.theta);
    u_act_prev = u_act;
    pose = next;
  }
}

struct EvalResult {
  double merit{0.0};
  CostBreakdown breakdown;
  double max_violation{0.0};
  Eigen::MatrixXd JtJ;
  Eigen::VectorXd Jtr;
  bool with_grad{false};
};

// Arc-length hints (one per reference pose per vehicle) for corridor
// projections during iteration.
using RefHints = std::array<std::vector<double>, 2>;

RefHints compute_ref_hints(const Problem& problem) {
  RefHints hints;
  for (int v = 0; v < problem.n_vehicles; ++v) {
    hints[v].resize(problem.refs[v].size());
    double s_prev = -1.0;
    for (std::size_t k = 0; k < problem.refs[v].size(); ++k) {
      const PathCoord c =
          s_prev < 0.0
              ? problem.path->project(problem.refs[v][k])
              : problem.path->project_near(problem.refs[v][k], s_prev, 5.0);
      hints[v][k] = c.s;
      s_prev = c.s;
    }
  }
  return hints;
}

// Evaluates merit (cost plus penalties), the smooth cost breakdown, the
// worst inequality violation, and optionally the Gauss-Newton normal
// equations.
EvalResult evaluate(const Problem& problem, const std::vector<double>& z,
                    double mu, bool with_grad, const RefHints& hints) {
  const int K = problem.horizon;
  const int n_own = vars_per_vehicle(problem);
  const int n_vars = num_decision_vars(problem);
  const bool pi = problem.variant == Variant::kFollowerPiConstrained;

  EvalResult res;
  res.with_grad = with_grad;
  if (with_grad) {
    res.JtJ = Eigen::MatrixXd::Zero(n_vars, n_vars);
    res.Jtr = Eigen::VectorXd::Zero(n_vars);
  }

  const auto inputs = unpack_inputs(problem, z);
  std::array<VehicleRollout, 2> rollouts;
  for (int v = 0; v < problem.n_vehicles; ++v) {
    rollout_vehicle(problem, v, inputs[v], with_grad, &rollouts[v]);
  }

  Eigen::RowVectorXd row(n_vars);
  auto add_row = [&](double r, const Eigen::RowVectorXd& grad_row) {
    res.merit += r * r;
    if (with_grad) {
      res.JtJ.noalias() += grad_row.transpose() * grad_row;
      res.Jtr.noalias() += grad_row.transpose() * r;
    }
  };
  auto add_const = [&](double r) { res.merit += r * r; };

  for (int v = 0; v < problem.n_vehicles; ++v) {
    const VehicleRollout& ro = rollouts[v];
    const int base = v * n_own;

    for (int k = 0; k < K; ++k) {
      // Reference tracking.
      const Pose2& ref = problem.refs[v][k];
      const Pose2& st = ro.states[k];
      const Twist2 e = log_se2(compose(ref, inverse(st)));
      const double ev[3] = {e.rho_x, e.rho_y, e.phi};
      Eigen::Matrix3d D;
      if (with_grad) D = log_error_jacobian(ref, st);
      for (int i = 0; i < 3; ++i) {
        const double w = std::sqrt(problem.weights.w_ref[i]);
        res.breakdown.j_ref += problem.weights.w_ref[i] * ev[i] * ev[i];
        if (with_grad) {
          row.setZero();
          row.segment(base, n_own) = w * (D.row(i) * ro.S[k]);
          add_row(w * ev[i], row);
        } else {
          add_const(w * ev[i]);
        }
      }

      // Input magnitude.
      const ControlInput& u = ro.u_cmd[k];
      const double uc[2] = {u.v, u.delta};
      for (int i = 0; i < 2; ++i) {
        const double w = std::sqrt(problem.weights.w_cont[i]);
        res.breakdown.j_cont += problem.weights.w_cont[i] * uc[i] * uc[i];
        const bool is_var = !pi || i == 1;
        if (with_grad && is_var) {
          row.setZero();
          row(base + (pi ? k : 2 * k + i)) = w;
          add_row(w * uc[i], row);
        } else {
          add_const(w * uc[i]);
        }
      }

      // Input rate.
      const ControlInput u_before =
          k == 0 ? problem.u_prev[v] : ro.u_cmd[k - 1];
      const double du[2] = {u.v - u_before.v, u.delta - u_before.delta};
      for (int i = 0; i < 2; ++i) {
        const double w = std::sqrt(problem.weights.w_acc[i]);
        res.breakdown.j_acc += problem.weights.w_acc[i] * du[i] * du[i];
        const bool is_var = !pi || i == 1;
        if (with_grad && is_var) {
          row.setZero();
          const int col = pi ? k : 2 * k + i;
          row(base + col) = w;
          if (k > 0) row(base + (pi ? k - 1 : 2 * (k - 1) + i)) = -w;
          add_row(w * du[i], row);
        } else {
          add_const(w * du[i]);
        }
      }

      // Corridor penalty (exterior quadratic).
      const PathCoord pc =
          problem.path->project_near(st, hints[v][k], kProjectionWindow);
      const double viol = std::abs(pc.lateral) - problem.corridor_half_width;
      if (viol > res.max_violation) res.max_violation = viol;
      if (viol > 0.0) {
        const double w = std::sqrt(mu);
        if (with_grad) {
          const double path_heading = wrap_angle(st.theta - pc.heading_err);
          const double sign = pc.lateral >= 0.0 ? 1.0 : -1.0;
          // Left normal of the path at the projection point.
          const double nx = -std::sin(path_heading) * sign;
          const double ny = std::cos(path_heading) * sign;
          row.setZero();
          row.segment(base, n_own) =
              w * (nx * ro.S[k].row(0) + ny * ro.S[k].row(1));
          add_row(w * viol, row);
        } else {
          add_const(w * viol);
        }
      }
    }
  }

  // Inter-robot distance: cost term plus box penalties.
  const bool has_dist = problem.variant == Variant::kFollowerDistributed ||
                        problem.variant == Variant::kCentralized;
  if (has_dist) {
    const bool centralized = problem.variant == Variant::kCentralized;
    const VehicleRollout& self = rollouts[centralized ? 1 : 0];
    const int self_base = centralized ? n_own : 0;

    for (int k = 0; k < K; ++k) {
      const Pose2& pf = self.states[k];
      const Pose2 pl =
          centralized ? rollouts[0].states[k] : problem.leader_traj[k];
      const double dx = pl.x - pf.x;
      const double dy = pl.y - pf.y;
      double gap = std::hypot(dx, dy);
      double gx = 1.0;
      double gy = 0.0;
      if (gap > 1e-9) {
        gx = dx / gap;
        gy = dy / gap;
      }

      auto dist_row = [&](double w) {
        // d(gap)/dz through the follower block, plus the leader block when
        // its poses are decision-dependent.
        row.setZero();
        row.segment(self_base, n_own) =
            -w * (gx * self.S[k].row(0) + gy * self.S[k].row(1));
        if (centralized) {
          row.segment(0, n_own) +=
              w * (gx * rollouts[0].S[k].row(0) + gy * rollouts[0].S[k].row(1));
        }
      };

      const double dev = gap - problem.d_target;
      res.breakdown.j_dist += problem.weights.w_dist * dev * dev;
      const double wd = std::sqrt(problem.weights.w_dist);
      if (with_grad) {
        dist_row(wd);
        add_row(wd * dev, row);
      } else {
        add_const(wd * dev);
      }

      const double viol_low = problem.d_min - gap;
      const double viol_high = gap - problem.d_max;
      const double viol = std::max(viol_low, viol_high);
      if (viol > res.max_violation) res.max_violation = viol;
      if (viol > 0.0) {
        const double w = std::sqrt(mu);
        if (with_grad) {
          dist_row(viol_low > viol_high ? -w : w);
          add_row(w * viol, row);
        } else {
          add_const(w * viol);
        }
      }
    }
  }

  return res;
}

// Sequential forward clamp onto the box and rate constraints; feasible by
// construction.
void project_feasible(const Problem& problem, std::vector<double>* z) {
  const int K = problem.horizon;
  const int n_own = vars_per_vehicle(problem);
  const bool pi = problem.variant == Variant::kFollowerPiConstrained;

  for (int v = 0; v < problem.n_vehicles; ++v) {
    const VehicleParams& params = problem.vehicle[v];
    ControlInput prev = problem.u_prev[v];
    for (int k = 0; k < K; ++k) {
      if (pi) {
        double& d = (*z)[v * n_own + k];
        d = std::clamp(d, std::max(params.delta_min, prev.delta - params.ddelta_max),
                       std::min(params.delta_max, prev.delta + params.ddelta_max));
        prev = ControlInput{problem.v_ref, d};
      } else {
        double& vel = (*z)[v * n_own + 2 * k];
        double& d = (*z)[v * n_own + 2 * k + 1];
        vel = std::clamp(vel, std::max(params.v_min, prev.v - params.dv_max),
                         std::min(params.v_max, prev.v + params.dv_max));
        d = std::clamp(d, std::max(params.delta_min, prev.delta - params.ddelta_max),
                       std::min(params.delta_max, prev.delta + params.ddelta_max));
        prev = ControlInput{vel, d};
      }
    }
  }
}

double kkt_residual(const Problem& problem, const std::vector<double>& z,
                    const Eigen::VectorXd& grad) {
  std::vector<double> stepped(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    stepped[i] = z[i] - grad(static_cast<Eigen::Index>(i));
  }
  project_feasible(problem, &stepped);
  double kkt = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    kkt = std::max(kkt, std::abs(z[i] - stepped[i]));
  }
  return kkt;
}

std::vector<double> cold_start(const Problem& problem) {
  const int K = problem.horizon;
  std::vector<double> z(num_decision_vars(problem));
  const bool pi = problem.variant == Variant::kFollowerPiConstrained;
  const int n_own = vars_per_vehicle(problem);
  for (int v = 0; v < problem.n_vehicles; ++v) {
    const ControlInput& u = problem.initial[v].u_act;
    for (int k = 0; k < K; ++k) {
      if (pi) {
        z[v * n_own + k] = u.delta;
      } else {
        z[v * n_own + 2 * k] = u.v;
        z[v * n_own + 2 * k + 1] = u.delta;
      }
    }
  }
  return z;
}

}  // namespace

void CostWeights::validate() const {
  for (double w : w_ref) {
    if (w <= 0.0) throw std::invalid_argument("CostWeights: w_ref must be PD");
  }
  for (double w : w_cont) {
    if (w <= 0.0) throw std::invalid_argument("CostWeights: w_cont must be PD");
  }
  for (double w : w_acc) {
    if (w <= 0.0) throw std::invalid_argument("CostWeights: w_acc must be PD");
  }
  if (w_dist <= 0.0) {
    throw std::invalid_argument("CostWeights: w_dist must be > 0");
  }
}

void Problem::validate() const {
  if (horizon < 2) throw std::invalid_argument("Problem: horizon must be >= 2");
  if (dt <= 0.0) throw std::invalid_argument("Problem: dt must be > 0");
  if (path == nullptr) throw std::invalid_argument("Problem: path required");
  if (!(d_min < d_target && d_target < d_max)) {
    throw std::invalid_argument("Problem: need d_min < d_target < d_max");
  }
  weights.validate();

  const int expected_vehicles = variant == Variant::kCentralized ? 2 : 1;
  if (n_vehicles != expected_vehicles) {
    throw std::invalid_argument("Problem: vehicle count does not match variant");
  }
  for (int v = 0; v < n_vehicles; ++v) {
    vehicle[v].validate();
    if (static_cast<int>(refs[v].size()) != horizon) {
      throw std::invalid_argument("Problem: refs must have horizon entries");
    }
  }
  if (variant == Variant::kFollowerDistributed &&
      static_cast<int>(leader_traj.size()) != horizon) {
    throw std::invalid_argument(
        "Problem: FollowerDistributed requires a leader trajectory");
  }
  if (variant != Variant::kFollowerDistributed && !leader_traj.empty()) {
    throw std::invalid_argument(
        "Problem: leader trajectory only valid for FollowerDistributed");
  }
}

CostBreakdown eval_costs(const std::vector<Pose2>& states,
                         const std::vector<ControlInput>& inputs,
                         const std::vector<Pose2>& refs,
                         const CostWeights& weights,
                         const ControlInput& u_prev,
                         const std::vector<Pose2>* leader_traj,
                         double d_target) {
  CostBreakdown out;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const Twist2 e = log_se2(compose(refs[k], inverse(states[k])));
    out.j_ref += weights.w_ref[0] * e.rho_x * e.rho_x +
                 weights.w_ref[1] * e.rho_y * e.rho_y +
                 weights.w_ref[2] * e.phi * e.phi;
    out.j_cont += weights.w_cont[0] * inputs[k].v * inputs[k].v +
                  weights.w_cont[1] * inputs[k].delta * inputs[k].delta;
    const ControlInput& before = k == 0 ? u_prev : inputs[k - 1];
    const double dv = inputs[k].v - before.v;
    const double dd = inputs[k].delta - before.delta;
    out.j_acc += weights.w_acc[0] * dv * dv + weights.w_acc[1] * dd * dd;
  }
  if (leader_traj != nullptr) {
    out.j_dist = eval_dist_cost(*leader_traj, states, weights.w_dist, d_target);
  }
  return out;
}

double eval_dist_cost(const std::vector<Pose2>& leader_states,
                      const std::vector<Pose2>& follower_states,
                      double w_dist, double d_target) {
  double cost = 0.0;
  for (std::size_t k = 0; k < follower_states.size(); ++k) {
    const double gap = std::hypot(leader_states[k].x - follower_states[k].x,
                                  leader_states[k].y - follower_states[k].y);
    const double dev = gap - d_target;
    cost += w_dist * dev * dev;
  }
  return cost;
}

Solution warm_shift(const Solution& previous) {
  Solution shifted = previous;
  for (auto& seq : shifted.inputs) {
    if (seq.size() >= 2) {
      seq.erase(seq.begin());
      seq.push_back(seq.back());
    }
  }
  for (auto& seq : shifted.states) {
    if (seq.size() >= 2) {
      seq.erase(seq.begin());
      seq.push_back(seq.back());
    }
  }
  return shifted;
}

int num_decision_vars(const Problem& problem) {
  return problem.n_vehicles * vars_per_vehicle(problem);
}

std::vector<double> pack_inputs(
    const Problem& problem,
    const std::vector<std::vector<ControlInput>>& inputs) {
  std::vector<double> z(num_decision_vars(problem));
  const int n_own = vars_per_vehicle(problem);
  const bool pi = problem.variant == Variant::kFollowerPiConstrained;
  for (int v = 0; v < problem.n_vehicles; ++v) {
    for (int k = 0; k < problem.horizon; ++k) {
      if (pi) {
        z[v * n_own + k] = inputs[v][k].delta;
      } else {
        z[v * n_own + 2 * k] = inputs[v][k].v;
        z[v * n_own + 2 * k + 1] = inputs[v][k].delta;
      }
    }
  }
  return z;
}

std::vector<std::vector<ControlInput>> unpack_inputs(
    const Problem& problem, const std::vector<double>& z) {
  std::vector<std::vector<ControlInput>> inputs(problem.n_vehicles);
  const int n_own = vars_per_vehicle(problem);
  const bool pi = problem.variant == Variant::kFollowerPiConstrained;
  for (int v = 0; v < problem.n_vehicles; ++v) {
    inputs[v].resize(problem.horizon);
    for (int k = 0; k < problem.horizon; ++k) {
      if (pi) {
        inputs[v][k] = ControlInput{problem.v_ref, z[v * n_own + k]};
      } else {
        inputs[v][k] =
            ControlInput{z[v * n_own + 2 * k], z[v * n_own + 2 * k + 1]};
      }
    }
  }
  return inputs;
}

double cost_value(const Problem& problem, const std::vector<double>& z) {
  const RefHints hints = compute_ref_hints(problem);
  const EvalResult res = evaluate(problem, z, 0.0, false, hints);
  return res.breakdown.total();
}

std::vector<double> cost_gradient(const Problem& problem,
                                  const std::vector<double>& z) {
  const RefHints hints = compute_ref_hints(problem);
  const EvalResult res = evaluate(problem, z, 0.0, true, hints);
  std::vector<double> grad(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    grad[i] = 2.0 * res.Jtr(static_cast<Eigen::Index>(i));
  }
  return grad;
}

Solution solve(const Problem& problem, const Solution* warm_start) {
  problem.validate();
  for (int v = 0; v < problem.n_vehicles; ++v) {
    const PathCoord c = problem.path->project(problem.initial[v].pose);
    if (std::abs(c.lateral) > problem.corridor_half_width + 1.0) {
      throw std::runtime_error("mpc::solve: initial state outside corridor");
    }
  }

  std::vector<double> z;
  if (warm_start != nullptr &&
      static_cast<int>(warm_start->inputs.size()) == problem.n_vehicles &&
      static_cast<int>(warm_start->inputs[0].size()) == problem.horizon) {
    z = pack_inputs(problem, warm_start->inputs);
  } else {
    z = cold_start(problem);
  }
  project_feasible(problem, &z);

  const RefHints hints = compute_ref_hints(problem);
  const int n_vars = num_decision_vars(problem);

  double mu = kPenaltyMu0;
  EvalResult ev = evaluate(problem, z, mu, true, hints);
  if (!std::isfinite(ev.merit)) {
    throw std::runtime_error("mpc::solve: non-finite cost at initial guess");
  }

  Solution sol;
  sol.merit_history.push_back(ev.merit);

  int iterations = 0;
  double kkt = std::numeric_limits<double>::infinity();

  for (int outer = 0; outer < kOuterIterations; ++outer) {
    bool stalled = false;
    while (iterations < kMaxIterations) {
      const Eigen::VectorXd grad = 2.0 * ev.Jtr;
      kkt = kkt_residual(problem, z, grad);
      if (kkt < kKktTol) break;

      Eigen::MatrixXd H = ev.JtJ;
      const double damping =
          1e-10 * std::max(1.0, H.diagonal().maxCoeff());
      H.diagonal().array() += damping;
      const Eigen::VectorXd step = H.ldlt().solve(-ev.Jtr);

      bool accepted = false;
      std::vector<double> z_cand(z.size());
      double step_norm = 0.0;
      double t = 1.0;
      for (int bt = 0; bt < kMaxBacktracks; ++bt, t *= 0.5) {
        for (std::size_t i = 0; i < z.size(); ++i) {
          z_cand[i] = z[i] + t * step(static_cast<Eigen::Index>(i));
        }
        project_feasible(problem, &z_cand);
        double directional = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
          directional +=
              grad(static_cast<Eigen::Index>(i)) * (z_cand[i] - z[i]);
        }
        if (directional >= 0.0) continue;
        const EvalResult cand = evaluate(problem, z_cand, mu, false, hints);
        if (cand.merit <= ev.merit + kArmijoC * directional) {
          step_norm = 0.0;
          for (std::size_t i = 0; i < z.size(); ++i) {
            step_norm = std::max(step_norm, std::abs(z_cand[i] - z[i]));
          }
          z = z_cand;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        stalled = true;
        break;
      }
      ev = evaluate(problem, z, mu, true, hints);
      sol.merit_history.push_back(ev.merit);
      ++iterations;
      if (step_norm < kStepTol) break;
    }
    (void)stalled;
    if (ev.max_violation < kViolationTol || iterations >= kMaxIterations ||
        outer == kOuterIterations - 1) {
      break;
    }
    mu *= 10.0;
    ev = evaluate(problem, z, mu, true, hints);
  }

  // Package the final iterate.
  const auto inputs = unpack_inputs(problem, z);
  sol.inputs.assign(inputs.begin(), inputs.begin() + problem.n_vehicles);
  sol.states.resize(problem.n_vehicles);
  for (int v = 0; v < problem.n_vehicles; ++v) {
    VehicleRollout ro;
    rollout_vehicle(problem, v, inputs[v], false, &ro);
    sol.states[v] = ro.states;
  }
  sol.costs = eval_costs(sol.states[0], sol.inputs[0], problem.refs[0],
                         problem.weights, problem.u_prev[0],
                         problem.variant == Variant::kFollowerDistributed
                             ? &problem.leader_traj
                             : nullptr,
                         problem.d_target);
  if (problem.variant == Variant::kCentralized) {
    const CostBreakdown fol =
        eval_costs(sol.states[1], sol.inputs[1], problem.refs[1],
                   problem.weights, problem.u_prev[1], nullptr,
                   problem.d_target);
    sol.costs.j_ref += fol.j_ref;
    sol.costs.j_cont += fol.j_cont;
    sol.costs.j_acc += fol.j_acc;
    sol.costs.j_dist = eval_dist_cost(sol.states[0], sol.states[1],
                                      problem.weights.w_dist,
                                      problem.d_target);
  }

  const Eigen::VectorXd grad = 2.0 * ev.Jtr;
  sol.kkt_residual = kkt_residual(problem, z, grad);
  sol.constraint_violation_max = ev.max_violation;
  sol.iterations = iterations;
  sol.converged = sol.kkt_residual < kKktTol &&
                  sol.constraint_violation_max < kViolationTol;
  (void)n_vars;
  return sol;
}

}  // namespace mpc
}  // namespace convoy
