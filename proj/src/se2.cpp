#include "sgw/se2.hpp"

#include <cassert>

namespace sgw {

double wrap_angle(double t) {
  assert(std::isfinite(t));
  if (t >= -kPi && t < kPi) return t;
  double w = std::fmod(t + kPi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  w -= kPi;
  // fmod can round a value just below 2pi up to exactly 2pi after the shift.
  if (w >= kPi) w -= kTwoPi;
  return w;
}

Pose2 compose(const Pose2& a, const Pose2& b) {
  return {a.transform(b.p()), a.theta() + b.theta()};
}

Pose2 inverse(const Pose2& a) {
  const double c = std::cos(a.theta()), s = std::sin(a.theta());
  // R^T * (-p)
  const Vec2 q{-(c * a.x() + s * a.y()), -(-s * a.x() + c * a.y())};
  return {q, -a.theta()};
}

}  // namespace sgw
