#pragma once

#include <cmath>

namespace convoy {

/// Wraps an angle to the canonical interval (-pi, pi].
double wrap_angle(double theta);

/// Planar pose, an element of SE(2). The heading is wrapped to (-pi, pi]
/// at construction so equality-style comparisons are well defined.
struct Pose2 {
  double x{0.0};
  double y{0.0};
  double theta{0.0};

  Pose2() = default;
  Pose2(double x_in, double y_in, double theta_in)
      : x(x_in), y(y_in), theta(wrap_angle(theta_in)) {}
};

/// Element of the Lie algebra se(2) as a 3-vector (rho_x, rho_y, phi).
struct Twist2 {
  double rho_x{0.0};
  double rho_y{0.0};
  double phi{0.0};
};

/// Group product a * b.
Pose2 compose(const Pose2& a, const Pose2& b);

/// Group inverse, compose(a, inverse(a)) == identity.
Pose2 inverse(const Pose2& a);

/// Exponential map se(2) -> SE(2), closed form with a series fallback for
/// small rotations.
Pose2 exp_se2(const Twist2& xi);

/// Logarithmic map SE(2) -> se(2), inverse of exp_se2.
Twist2 log_se2(const Pose2& T);

/// Geodesic interpolation exp(alpha * log(b * a^-1)) * a for alpha in [0, 1].
/// Endpoints are exact. Throws std::invalid_argument when alpha is out of
/// range.
Pose2 interpolate(const Pose2& a, const Pose2& b, double alpha);

namespace detail {
// Coefficients of V(phi)^-1 = [[a, c], [-c, a]] with a = (phi/2)cot(phi/2)
// and c = phi/2, plus the derivative da/dphi used by cost Jacobians.
void vinv_coeffs(double phi, double* a, double* c);
double vinv_a_derivative(double phi);
}  // namespace detail

}  // namespace convoy
