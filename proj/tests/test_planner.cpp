#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "sgw/error.hpp"
#include "sgw/planner.hpp"

using namespace sgw;
using sgw::testing::make_rect;

namespace {

Landscape empty_scene() {
  Landscape s;
  s.width = 300;
  return s;
}

CandidateGrasp free_grasp(double x, double y, double aperture) {
  return CandidateGrasp{Pose2(x, y, -kPi / 2), aperture, 1.0, 0};
}

// Walls 20 mm wide leave 14 mm of clearance on each side of a 20 mm block.
Landscape gap_scene() {
  Landscape s;
  s.width = 300;
  s.objects = {make_rect(0, 100, 0, 20, 20), make_rect(1, 66, 0, 20, 60), make_rect(2, 134, 0, 20, 60)};
  return s;
}

}  // namespace

TEST_CASE("start at the grasp gives a single waypoint") {
  const auto g = free_grasp(50, 100, 30);
  const auto plan = plan_trajectory({g.pose, g.aperture}, g, empty_scene(), GripperModel{});
  CHECK(plan.horizon() == 0);
  CHECK(plan.waypoints[0].pose == g.pose);
  CHECK(plan.controls[0] == Vec2::Zero());
}

TEST_CASE("free-space plan spacing and nominal controls") {
  PlannerParams params;
  params.step_length = 10.0;
  const auto g = free_grasp(150, 100, 30);
  const Waypoint start{Pose2(50, 100, -kPi / 2), 30};
  const auto plan = plan_trajectory(start, g, empty_scene(), GripperModel{}, params);
  REQUIRE(plan.waypoints.size() == 11);
  for (int tau = 1; tau <= plan.horizon(); ++tau) CHECK(plan.controls[tau].norm() == doctest::Approx(10.0 / params.dt));
  CHECK(plan.waypoints[0].pose == g.pose);
  CHECK(plan.waypoints[0].aperture == g.aperture);
  CHECK(plan.waypoints[plan.horizon()] == start);
}

TEST_CASE("waypoints are collinear and replay open loop to the grasp") {
  const auto g = free_grasp(180, 40, 25);
  const Waypoint start{Pose2(20, 170, -kPi / 2 + 0.4), 50};
  const auto plan = plan_trajectory(start, g, empty_scene(), GripperModel{});
  const Vec2 dir = (g.pose.p() - start.pose.p()).normalized();
  for (const auto& w : plan.waypoints) {
    const Vec2 d = w.pose.p() - start.pose.p();
    CHECK(std::abs(dir.x() * d.y() - dir.y() * d.x()) < 1e-9);
  }
  Vec2 x = start.pose.p();
  for (int tau = plan.horizon(); tau >= 1; --tau) x += plan.controls[tau] * plan.dt;
  CHECK((x - g.pose.p()).norm() < 1e-9);
  for (int tau = 1; tau <= plan.horizon(); ++tau)
    CHECK((plan.waypoints[tau - 1].pose.p() - plan.waypoints[tau].pose.p()).norm() <= 2.0 + 1e-9);
}

TEST_CASE("orientation follows the shortest angular path") {
  PlannerParams params;
  params.step_length = 10.0;
  const CandidateGrasp g{Pose2(150, 100, -kPi / 2 - 0.2), 30, 1.0, 0};
  const Waypoint start{Pose2(50, 100, -kPi / 2 + 0.4), 30};
  const auto plan = plan_trajectory(start, g, empty_scene(), GripperModel{}, params);
  for (int tau = 1; tau <= plan.horizon(); ++tau) {
    const double step = angle_diff(plan.waypoints[tau - 1].pose.theta(), plan.waypoints[tau].pose.theta());
    CHECK(step == doctest::Approx(-0.06).epsilon(1e-9));
  }
}

TEST_CASE("aperture narrows to fit a gap and closes to the grasp") {
  const Landscape scene = gap_scene();
  const GripperModel gripper;
  const CandidateGrasp g{Pose2(100, 12, -kPi / 2), 20.0, 1.0, 0};
  const Waypoint start{Pose2(100, 150, -kPi / 2), 40.0};
  const auto plan = plan_trajectory(start, g, scene, gripper);

  const double gap_width = 134 - 10 - (66 + 10);
  for (const auto& w : plan.waypoints) {
    CHECK_FALSE(check_gripper_collision(w.pose, w.aperture, gripper, scene).penetrating());
    // Independent clearance oracle: inside the gap both finger discs must fit between the walls.
    if (w.pose.y() <= 60) CHECK(w.aperture + 2 * gripper.finger_radius <= gap_width + 1e-9);
  }
  CHECK(plan.waypoints[0].aperture == 20.0);
  CHECK(plan.waypoints[1].aperture > 20.0);
}

TEST_CASE("tilted approach beside a post stays clear") {
  Landscape scene = empty_scene();
  scene.objects = {make_rect(0, 100, 0, 20, 20), make_rect(1, 127, 0, 6, 80)};
  const GripperModel gripper;
  const CandidateGrasp g{Pose2(100, 12, -kPi / 2), 20.0, 1.0, 0};
  const Waypoint start{Pose2(100, 150, -kPi / 2 + 0.6), 20.0};
  const auto plan = plan_trajectory(start, g, scene, gripper);
  for (const auto& w : plan.waypoints)
    CHECK_FALSE(check_gripper_collision(w.pose, w.aperture, gripper, scene).penetrating());
}

TEST_CASE("unrepairable waypoint names its index") {
  // A bar spanning wider than the fully open gripper blocks the straight line.
  Landscape scene = empty_scene();
  Obstacle bar = make_rect(0, 100, 120, 100, 5);
  scene.objects = {bar};
  const CandidateGrasp g{Pose2(92, 100, -kPi / 2), 10.0, 1.0, 0};
  const Waypoint start{Pose2(92, 150, -kPi / 2), 30.0};
  try {
    plan_trajectory(start, g, scene, GripperModel{});
    FAIL("expected PlanningError");
  } catch (const PlanningError& e) {
    CHECK(e.waypoint() > 0);
    CHECK(e.waypoint() < 25);
  }
}

TEST_CASE("planning is deterministic") {
  const Landscape scene = gap_scene();
  const CandidateGrasp g{Pose2(100, 12, -kPi / 2), 20.0, 1.0, 0};
  const Waypoint start{Pose2(90, 160, -kPi / 2 + 0.3), 40.0};
  CHECK(plan_trajectory(start, g, scene, GripperModel{}) == plan_trajectory(start, g, scene, GripperModel{}));
}

TEST_CASE("check_gripper_collision classifies link contact") {
  Landscape scene = empty_scene();
  scene.objects = {make_rect(0, 100, 0, 40, 30)};
  const GripperModel gripper;
  const auto high = check_gripper_collision(Pose2(100, 200, -kPi / 2), 20, gripper, scene);
  CHECK(high.links[0].state == ContactState::kFree);
  CHECK(high.links[1].state == ContactState::kFree);
  // L2 centre 5 mm right of the right face: tangent.
  const auto tangent = check_link({125, 15}, 5, gripper, scene);
  CHECK(tangent.state == ContactState::kTouching);
  CHECK(tangent.gap == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(check_link({100, 15}, 5, gripper, scene).state == ContactState::kPenetrating);
}
