#pragma once

#include <Eigen/Core>

#include <cmath>
#include <numbers>

namespace sgw {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into [-pi, pi). Non-finite input is a contract violation.
double wrap_angle(double t);

/// Signed shortest angular difference a - b, in [-pi, pi).
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

/// Rigid 2D pose. Position in millimetres, orientation in radians.
/// The constructor keeps theta wrapped to [-pi, pi).
class Pose2 {
 public:
  Pose2() = default;
  Pose2(double x, double y, double theta) : p_(x, y), theta_(wrap_angle(theta)) {}
  Pose2(const Vec2& p, double theta) : p_(p), theta_(wrap_angle(theta)) {}

  static Pose2 identity() { return {}; }

  const Vec2& p() const { return p_; }
  double x() const { return p_.x(); }
  double y() const { return p_.y(); }
  double theta() const { return theta_; }

  /// Rotates a vector expressed in this frame into the parent frame.
  Vec2 rotate(const Vec2& v) const {
    const double c = std::cos(theta_), s = std::sin(theta_);
    return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
  }
  /// Maps a point from this frame into the parent frame.
  Vec2 transform(const Vec2& v) const { return p_ + rotate(v); }

  bool operator==(const Pose2&) const = default;

 private:
  Vec2 p_ = Vec2::Zero();
  double theta_ = 0.0;
};

/// a ∘ b: b expressed in a's frame, mapped to a's parent frame.
Pose2 compose(const Pose2& a, const Pose2& b);
Pose2 inverse(const Pose2& a);

/// Position distance and absolute wrapped angle distance.
inline double position_distance(const Pose2& a, const Pose2& b) { return (a.p() - b.p()).norm(); }
inline double angle_distance(const Pose2& a, const Pose2& b) {
  return std::abs(angle_diff(a.theta(), b.theta()));
}

}  // namespace sgw
