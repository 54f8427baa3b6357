#include "convoy/geometry.hpp"

#include <stdexcept>

namespace convoy {

namespace {
// Below this rotation magnitude the exp/log V-matrix switches to its
// second-order series to avoid 0/0.
constexpr double kSmallAngle = 1e-9;
}  // namespace

double wrap_angle(double theta) {
  double wrapped = std::remainder(theta, 2.0 * M_PI);
  if (wrapped <= -M_PI) {
    wrapped += 2.0 * M_PI;
  }
  return wrapped;
}

Pose2 compose(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  return Pose2(a.x + c * b.x - s * b.y,  //
               a.y + s * b.x + c * b.y,  //
               a.theta + b.theta);
}

Pose2 inverse(const Pose2& a) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  return Pose2(-(c * a.x + s * a.y), -(-s * a.x + c * a.y), -a.theta);
}

Pose2 exp_se2(const Twist2& xi) {
  const double phi = xi.phi;
  double A;  // sin(phi)/phi
  double B;  // (1 - cos(phi))/phi
  if (std::abs(phi) < kSmallAngle) {
    A = 1.0 - phi * phi / 6.0;
    B = 0.5 * phi;
  } else {
    A = std::sin(phi) / phi;
    B = (1.0 - std::cos(phi)) / phi;
  }
  return Pose2(A * xi.rho_x - B * xi.rho_y,  //
               B * xi.rho_x + A * xi.rho_y,  //
               phi);
}

Twist2 log_se2(const Pose2& T) {
  const double phi = T.theta;
  double a;
  double c;
  detail::vinv_coeffs(phi, &a, &c);
  return Twist2{a * T.x + c * T.y, -c * T.x + a * T.y, phi};
}

Pose2 interpolate(const Pose2& a, const Pose2& b, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("interpolate: alpha must be in [0, 1]");
  }
  if (alpha == 0.0) return a;
  if (alpha == 1.0) return b;
  Twist2 delta = log_se2(compose(b, inverse(a)));
  delta.rho_x *= alpha;
  delta.rho_y *= alpha;
  delta.phi *= alpha;
  return compose(exp_se2(delta), a);
}

namespace detail {

void vinv_coeffs(double phi, double* a, double* c) {
  *c = 0.5 * phi;
  if (std::abs(phi) < kSmallAngle) {
    *a = 1.0 - phi * phi / 12.0;
  } else {
    const double half = 0.5 * phi;
    *a = half * std::cos(half) / std::sin(half);
  }
}

double vinv_a_derivative(double phi) {
  // d/dphi of (phi/2)cot(phi/2). The direct form cancels catastrophically
  // near zero, so switch to the series below 1e-3 rad.
  if (std::abs(phi) < 1e-3) {
    return -phi / 6.0 - phi * phi * phi / 180.0;
  }
  const double half = 0.5 * phi;
  const double s = std::sin(half);
  const double cot = std::cos(half) / s;
  return 0.5 * (cot - half * (1.0 + cot * cot));
}

}  // namespace detail

}  // namespace convoy
