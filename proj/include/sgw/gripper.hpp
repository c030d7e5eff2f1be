#pragma once

#include <array>

#include "sgw/scene.hpp"
#include "sgw/se2.hpp"

namespace sgw {

inline constexpr int kGroundId = -1;
inline constexpr int kNoObject = -2;

/// Two spherical fingers on a parallel jaw. The gripper frame sits at the
/// midpoint between the finger centres; its x axis is the approach
/// direction, so theta = -pi/2 points straight down. L1 sits on the frame's
/// +y side. Aperture is the free gap between the finger surfaces.
struct GripperModel {
  double finger_radius = 5.0;
  double min_aperture = 0.0;
  double max_aperture = 80.0;
  /// Largest tilt of the approach direction away from straight down.
  double approach_cone = kPi / 3.0;
  /// A finger whose gap to a surface is at most this is touching it.
  double contact_tolerance = 1.0;
  /// Overlap deeper than this counts as penetration.
  double penetration_tolerance = 1e-6;

  double finger_offset(double aperture) const { return aperture / 2.0 + finger_radius; }
  bool within_cone(double theta) const { return std::abs(angle_diff(theta, -kPi / 2.0)) <= approach_cone; }

  bool operator==(const GripperModel&) const = default;
};

inline constexpr double kVerticalApproach = -kPi / 2.0;

/// World poses of L1 and L2 for a gripper pose and aperture.
std::array<Pose2, 2> link_poses(const GripperModel& gripper, const Pose2& pose, double aperture);

/// Gripper frame recovered from L1's pose and the aperture.
Pose2 gripper_from_link1(const GripperModel& gripper, const Pose2& link1, double aperture);

enum class ContactState { kFree, kTouching, kPenetrating };

struct LinkContact {
  ContactState state = ContactState::kFree;
  /// Smallest surface gap over all obstacles and the ground.
  double gap = 0.0;
  /// Obstacle with the smallest gap; kGroundId for the ground.
  int nearest = kNoObject;
  /// Unit direction pushing the finger out of the nearest obstacle.
  Vec2 normal = Vec2::UnitY();
};

struct ContactReport {
  std::array<LinkContact, 2> links;

  bool penetrating() const;
  bool touching(int object_id) const;
  bool both_touching(int object_id) const;
};

/// Finger gap to a single obstacle, circle against the exact shape.
double finger_gap(const Obstacle& obstacle, const Vec2& centre, double radius, Vec2* normal = nullptr);

LinkContact check_link(const Vec2& centre, double radius, const GripperModel& gripper, const Landscape& scene);

ContactReport check_gripper_collision(const Pose2& pose, double aperture, const GripperModel& gripper,
                                      const Landscape& scene);

}  // namespace sgw
