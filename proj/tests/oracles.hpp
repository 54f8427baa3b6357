// Test-only reference implementations, independent of the library's
// computation paths: generic homogeneous-matrix SE(2) arithmetic, brute-force
// ODE integration, dense path sampling, and small statistics helpers.
#pragma once

#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "convoy/geometry.hpp"
#include "convoy/path.hpp"

namespace oracle {

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 identity() {
  return Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
}

inline Mat3 pose_to_matrix(const convoy::Pose2& p) {
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  return Mat3{{{c, -s, p.x}, {s, c, p.y}, {0, 0, 1}}};
}

inline convoy::Pose2 matrix_to_pose(const Mat3& m) {
  return convoy::Pose2(m[0][2], m[1][2], std::atan2(m[1][0], m[0][0]));
}

inline Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double sum = 0.0;
      for (int k = 0; k < 3; ++k) sum += a[i][k] * b[k][j];
      out[i][j] = sum;
    }
  }
  return out;
}

// General Gauss-Jordan inverse; deliberately not the closed-form SE(2)
// inverse.
inline Mat3 matinv(const Mat3& m) {
  std::array<std::array<double, 6>, 3> aug{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) aug[i][j] = m[i][j];
    aug[i][3 + i] = 1.0;
  }
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
    }
    std::swap(aug[col], aug[pivot]);
    const double p = aug[col][col];
    if (std::abs(p) < 1e-14) throw std::runtime_error("singular matrix");
    for (int j = 0; j < 6; ++j) aug[col][j] /= p;
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = aug[r][col];
      for (int j = 0; j < 6; ++j) aug[r][j] -= f * aug[col][j];
    }
  }
  Mat3 out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out[i][j] = aug[i][3 + j];
  }
  return out;
}

// exp(xi) by explicit-Euler integration of the matrix ODE dT/dt = T * hat(xi)
// from the identity over t in [0, 1].
inline convoy::Pose2 exp_by_integration(const convoy::Twist2& xi,
                                        int n_steps) {
  const Mat3 hat{{{0.0, -xi.phi, xi.rho_x},
                  {xi.phi, 0.0, xi.rho_y},
                  {0.0, 0.0, 0.0}}};
  Mat3 T = identity();
  const double h = 1.0 / n_steps;
  for (int i = 0; i < n_steps; ++i) {
    const Mat3 dT = matmul(T, hat);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) T[r][c] += h * dT[r][c];
    }
  }
  return matrix_to_pose(T);
}

struct EulerResult {
  double x;
  double y;
  double theta;
};

// Explicit-Euler integration of the bicycle ODE with constant inputs.
inline EulerResult bicycle_euler(double x, double y, double theta, double v,
                                 double delta, double wheelbase, double dt,
                                 long n_steps) {
  const double h = dt / static_cast<double>(n_steps);
  const double omega = v * std::tan(delta) / wheelbase;
  const double vh = v * h;
  const double oh = omega * h;
  for (long i = 0; i < n_steps; ++i) {
    x += vh * std::cos(theta);
    y += vh * std::sin(theta);
    theta += oh;
  }
  return EulerResult{x, y, theta};
}

// Dense backward sampling (1 mm) for the largest s* < anchor_s whose chordal
// distance to the anchor equals d;  linear interpolation between samples.
inline double dense_offset_behind(const convoy::TeachPath& path,
                                  double anchor_s, double d,
                                  double step = 1e-3) {
  const convoy::Pose2 anchor = path.pose_at(anchor_s);
  auto chord = [&](double s) {
    const convoy::Pose2 q = path.pose_at(s);
    return std::hypot(q.x - anchor.x, q.y - anchor.y);
  };
  double lo = anchor_s - 4.0 * d;
  if (!path.closed()) lo = std::max(lo, 0.0);
  double prev_s = anchor_s;
  double prev_c = 0.0;
  for (double s = anchor_s - step; s >= lo - 1e-12; s -= step) {
    const double c = chord(s);
    if (c >= d) {
      const double t = (d - prev_c) / (c - prev_c);
      return prev_s + t * (s - prev_s);
    }
    prev_s = s;
    prev_c = c;
  }
  throw std::runtime_error("dense_offset_behind: no crossing in window");
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

inline double sample_std(const std::vector<double>& v) {
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// Spearman rank correlation; assumes no ties (continuous metrics).
inline double spearman_rho(const std::vector<double>& xs,
                           const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  auto ranks = [&](const std::vector<double>& v) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t rank = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (v[j] < v[i]) ++rank;
      }
      r[i] = static_cast<double>(rank);
    }
    return r;
  };
  const std::vector<double> rx = ranks(xs);
  const std::vector<double> ry = ranks(ys);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  }
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

}  // namespace oracle
