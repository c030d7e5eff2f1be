#include <Eigen/Dense>

#include <random>

#include "doctest.h"
#include "sgw/se2.hpp"

using namespace sgw;

namespace {

// Independent oracle: 3x3 homogeneous matrices.
Eigen::Matrix3d to_matrix(double x, double y, double t) {
  Eigen::Matrix3d m;
  m << std::cos(t), -std::sin(t), x, std::sin(t), std::cos(t), y, 0, 0, 1;
  return m;
}

void check_pose_matches(const Pose2& p, const Eigen::Matrix3d& m, double tol) {
  CHECK(p.x() == doctest::Approx(m(0, 2)).epsilon(tol));
  CHECK(p.y() == doctest::Approx(m(1, 2)).epsilon(tol));
  CHECK(std::abs(angle_diff(p.theta(), std::atan2(m(1, 0), m(0, 0)))) < tol);
}

Pose2 random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-200.0, 200.0), ang(-10.0, 10.0);
  return {pos(rng), pos(rng), ang(rng)};
}

bool near(const Pose2& a, const Pose2& b, double tol) {
  return (a.p() - b.p()).norm() < tol && std::abs(angle_diff(a.theta(), b.theta())) < tol;
}

}  // namespace

TEST_CASE("wrap_angle") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(-kPi).epsilon(1e-12));
  CHECK(wrap_angle(-kPi - 1e-9) == doctest::Approx(kPi - 1e-9).epsilon(1e-12));
  CHECK(wrap_angle(kPi) == doctest::Approx(-kPi));
  CHECK(wrap_angle(-kPi) == -kPi);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> any(-100.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = any(rng);
    const double w = wrap_angle(t);
    CHECK(w >= -kPi);
    CHECK(w < kPi);
    CHECK(wrap_angle(w) == w);
    // Congruent modulo 2pi.
    const double k = (t - w) / kTwoPi;
    CHECK(std::abs(k - std::round(k)) < 1e-9);
  }
}

TEST_CASE("compose and inverse against homogeneous matrices") {
  CHECK(near(compose(Pose2::identity(), Pose2(3, 4, 0.5)), Pose2(3, 4, 0.5), 1e-15));

  const Pose2 c = compose(Pose2(1, 0, kPi / 2), Pose2(1, 0, 0));
  check_pose_matches(c, to_matrix(1, 0, kPi / 2) * to_matrix(1, 0, 0), 1e-12);
  CHECK(c.x() == doctest::Approx(1.0));
  CHECK(c.y() == doctest::Approx(1.0));
  CHECK(c.theta() == doctest::Approx(kPi / 2));

  const Pose2 inv = inverse(Pose2(1, 0, kPi / 2));
  check_pose_matches(inv, to_matrix(1, 0, kPi / 2).inverse(), 1e-12);
  CHECK(inv.x() == doctest::Approx(0.0).epsilon(1e-12));
  // R(-pi/2) * -(1, 0) = (0, 1): the homogeneous-matrix inverse.
  CHECK(inv.y() == doctest::Approx(1.0));
  CHECK(inv.theta() == doctest::Approx(-kPi / 2));

  CHECK(near(inverse(Pose2::identity()), Pose2::identity(), 1e-15));

  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Pose2 a = random_pose(rng), b = random_pose(rng);
    check_pose_matches(compose(a, b), to_matrix(a.x(), a.y(), a.theta()) * to_matrix(b.x(), b.y(), b.theta()), 1e-12);
    CHECK(near(compose(a, inverse(a)), Pose2::identity(), 1e-12));
    CHECK(near(inverse(inverse(a)), a, 1e-12));
  }
}

TEST_CASE("group laws on random poses") {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 1000; ++i) {
    const Pose2 a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    CHECK(near(compose(compose(a, b), c), compose(a, compose(b, c)), 1e-9));
    CHECK(near(compose(Pose2::identity(), a), a, 1e-9));
    CHECK(near(compose(a, Pose2::identity()), a, 1e-9));
    CHECK(near(compose(inverse(a), a), Pose2::identity(), 1e-9));
    CHECK(a.theta() >= -kPi);
    CHECK(a.theta() < kPi);
  }
}

TEST_CASE("wrapping is idempotent bit for bit") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(-20.0, 20.0);
  for (int i = 0; i < 10000; ++i) {
    const double w = wrap_angle(unit(rng));
    CHECK(wrap_angle(w) == w);
    CHECK(Pose2(1.0, 2.0, w).theta() == w);
  }
}
