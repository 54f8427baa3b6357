#include "convoy/geometry.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

using convoy::compose;
using convoy::exp_se2;
using convoy::interpolate;
using convoy::inverse;
using convoy::log_se2;
using convoy::Pose2;
using convoy::Twist2;
using convoy::wrap_angle;

namespace {

void check_pose(const Pose2& actual, const Pose2& expected, double tol) {
  CHECK(actual.x == doctest::Approx(expected.x).epsilon(0).scale(1).epsilon(tol));
  CHECK(std::abs(actual.x - expected.x) < tol);
  CHECK(std::abs(actual.y - expected.y) < tol);
  CHECK(std::abs(wrap_angle(actual.theta - expected.theta)) < tol);
}

Pose2 random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-10.0, 10.0);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  return Pose2(pos(rng), pos(rng), ang(rng));
}

}  // namespace

TEST_CASE("wrap_angle maps to (-pi, pi]") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(3.0 * M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(2.5 * M_PI) == doctest::Approx(0.5 * M_PI));
  CHECK(wrap_angle(-0.5) == doctest::Approx(-0.5));
}

TEST_CASE("compose identity and inverse cases") {
  const Pose2 T(1.7, -2.3, 0.9);
  check_pose(compose(Pose2(), T), T, 1e-15);
  check_pose(compose(T, inverse(T)), Pose2(), 1e-12);

  // Quarter-turn case, frozen from the homogeneous-matrix oracle.
  check_pose(compose(Pose2(1, 0, M_PI / 2), Pose2(1, 0, 0)),
             Pose2(1, 1, M_PI / 2), 1e-12);
}

TEST_CASE("compose matches the homogeneous-matrix oracle") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const Pose2 a = random_pose(rng);
    const Pose2 b = random_pose(rng);
    const Pose2 expected = oracle::matrix_to_pose(
        oracle::matmul(oracle::pose_to_matrix(a), oracle::pose_to_matrix(b)));
    check_pose(compose(a, b), expected, 1e-12);
  }
}

TEST_CASE("inverse basics and matrix oracle") {
  check_pose(inverse(Pose2()), Pose2(), 1e-15);
  check_pose(inverse(Pose2(1, 0, 0)), Pose2(-1, 0, 0), 1e-15);

  // (1, 2, pi/3): value frozen from Gauss-Jordan inversion of the 3x3
  // homogeneous matrix.
  check_pose(inverse(Pose2(1.0, 2.0, M_PI / 3.0)),
             Pose2(-2.2320508075688772, -0.1339745962155614, -M_PI / 3.0),
             1e-12);

  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const Pose2 a = random_pose(rng);
    const Pose2 expected =
        oracle::matrix_to_pose(oracle::matinv(oracle::pose_to_matrix(a)));
    check_pose(inverse(a), expected, 1e-11);
  }
}

TEST_CASE("exp_se2 basics") {
  check_pose(exp_se2(Twist2{1, 0, 0}), Pose2(1, 0, 0), 1e-15);
  check_pose(exp_se2(Twist2{0, 0, M_PI}), Pose2(0, 0, M_PI), 1e-15);
  // Quarter-circle screw, frozen from the left-invariant ODE oracle.
  check_pose(exp_se2(Twist2{M_PI / 2, 0, M_PI / 2}), Pose2(1, 1, M_PI / 2),
             1e-12);
}

TEST_CASE("exp_se2 matches the ODE-integration oracle") {
  // 1e6-substep Euler of dT/dt = T hat(xi); first-order accurate, so the
  // comparison tolerance is much looser than the exp/log contract itself.
  const Twist2 cases[] = {{M_PI / 2, 0, M_PI / 2},
                          {0.3, -1.2, 2.1},
                          {-2.0, 0.7, -2.9},
                          {1.0, 1.0, 1e-7}};
  for (const Twist2& xi : cases) {
    const Pose2 expected = oracle::exp_by_integration(xi, 1000000);
    const Pose2 actual = exp_se2(xi);
    CHECK(std::abs(actual.x - expected.x) < 2e-5);
    CHECK(std::abs(actual.y - expected.y) < 2e-5);
    CHECK(std::abs(wrap_angle(actual.theta - expected.theta)) < 2e-5);
  }
}

TEST_CASE("log_se2 basics and round trip") {
  const Twist2 zero = log_se2(Pose2());
  CHECK(zero.rho_x == 0.0);
  CHECK(zero.rho_y == 0.0);
  CHECK(zero.phi == 0.0);

  const Twist2 pure = log_se2(Pose2(5, 0, 0));
  CHECK(pure.rho_x == doctest::Approx(5.0));
  CHECK(pure.rho_y == doctest::Approx(0.0));

  const Twist2 quarter = log_se2(Pose2(1, 1, M_PI / 2));
  CHECK(quarter.rho_x == doctest::Approx(M_PI / 2).epsilon(1e-12));
  CHECK(std::abs(quarter.rho_y) < 1e-12);
  CHECK(quarter.phi == doctest::Approx(M_PI / 2));
}

TEST_CASE("exp/log round trip on 1e4 random poses") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 10000; ++i) {
    const Pose2 T = random_pose(rng);
    const Pose2 back = exp_se2(log_se2(T));
    CHECK(std::abs(back.x - T.x) < 1e-9);
    CHECK(std::abs(back.y - T.y) < 1e-9);
    CHECK(std::abs(wrap_angle(back.theta - T.theta)) < 1e-9);
  }
}

TEST_CASE("associativity of compose") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 1000; ++i) {
    const Pose2 a = random_pose(rng);
    const Pose2 b = random_pose(rng);
    const Pose2 c = random_pose(rng);
    const Pose2 left = compose(compose(a, b), c);
    const Pose2 right = compose(a, compose(b, c));
    check_pose(left, right, 1e-12);
  }
}

TEST_CASE("interpolate endpoints and simple geodesics") {
  const Pose2 a(0.4, -0.3, 0.2);
  const Pose2 b(3.0, 1.0, -1.5);
  check_pose(interpolate(a, b, 0.0), a, 0.0);
  check_pose(interpolate(a, b, 1.0), b, 0.0);

  check_pose(interpolate(Pose2(), Pose2(2, 0, 0), 0.5), Pose2(1, 0, 0), 1e-14);
  check_pose(interpolate(Pose2(), Pose2(0, 0, M_PI / 2), 0.5),
             Pose2(0, 0, M_PI / 4), 1e-14);

  CHECK_THROWS_AS(interpolate(a, b, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(interpolate(a, b, 1.1), std::invalid_argument);
}

TEST_CASE("interpolation lies on the one-parameter subgroup") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 200; ++i) {
    const Pose2 a = random_pose(rng);
    const Pose2 b = random_pose(rng);
    const Pose2 direct = interpolate(a, b, 0.75);
    const Pose2 nested = interpolate(interpolate(a, b, 0.5), b, 0.5);
    check_pose(nested, direct, 1e-9);
  }
}
