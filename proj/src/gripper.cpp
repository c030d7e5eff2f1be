#include "sgw/gripper.hpp"

#include <limits>

namespace sgw {

std::array<Pose2, 2> link_poses(const GripperModel& gripper, const Pose2& pose, double aperture) {
  const double offset = gripper.finger_offset(aperture);
  return {compose(pose, Pose2(0.0, offset, 0.0)), compose(pose, Pose2(0.0, -offset, 0.0))};
}

Pose2 gripper_from_link1(const GripperModel& gripper, const Pose2& link1, double aperture) {
  return compose(link1, Pose2(0.0, -gripper.finger_offset(aperture), 0.0));
}

bool ContactReport::penetrating() const {
  return links[0].state == ContactState::kPenetrating || links[1].state == ContactState::kPenetrating;
}

bool ContactReport::touching(int object_id) const {
  for (const auto& l : links) {
    if (l.state == ContactState::kTouching && l.nearest == object_id) return true;
  }
  return false;
}

bool ContactReport::both_touching(int object_id) const {
  return links[0].state == ContactState::kTouching && links[0].nearest == object_id &&
         links[1].state == ContactState::kTouching && links[1].nearest == object_id;
}

double finger_gap(const Obstacle& obstacle, const Vec2& centre, double radius, Vec2* normal) {
  return signed_distance(obstacle, centre, normal) - radius;
}

LinkContact check_link(const Vec2& centre, double radius, const GripperModel& gripper, const Landscape& scene) {
  LinkContact contact;
  contact.gap = centre.y() - scene.ground_y - radius;
  contact.nearest = kGroundId;
  contact.normal = Vec2::UnitY();
  for (const auto& o : scene.objects) {
    Vec2 n;
    const double g = finger_gap(o, centre, radius, &n);
    if (g < contact.gap) {
      contact.gap = g;
      contact.nearest = o.id;
      contact.normal = n;
    }
  }
  if (contact.gap < -gripper.penetration_tolerance) {
    contact.state = ContactState::kPenetrating;
  } else if (contact.gap <= gripper.contact_tolerance) {
    contact.state = ContactState::kTouching;
  } else {
    contact.state = ContactState::kFree;
  }
  return contact;
}

ContactReport check_gripper_collision(const Pose2& pose, double aperture, const GripperModel& gripper,
                                      const Landscape& scene) {
  const auto links = link_poses(gripper, pose, aperture);
  ContactReport report;
  for (int i = 0; i < 2; ++i) report.links[i] = check_link(links[i].p(), gripper.finger_radius, gripper, scene);
  return report;
}

}  // namespace sgw
