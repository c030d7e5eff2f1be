#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "sgw/error.hpp"
#include "sgw/sim.hpp"

using namespace sgw;
using sgw::testing::make_rect;

namespace {

Landscape block_scene() {
  Landscape s;
  s.width = 200;
  s.objects = {make_rect(0, 100, 0, 40, 30)};
  return s;
}

PlantState at(double x, double y, double aperture, double theta = kVerticalApproach) {
  PlantState s;
  s.pose = Pose2(x, y, theta);
  s.aperture = aperture;
  return s;
}

SessionSetup demo_setup(Mode mode) {
  SessionSetup setup;
  setup.scene = block_scene();
  const CandidateGrasp g{Pose2(100, 22, kVerticalApproach), 40.0, 1.0, 0};
  setup.start = {Pose2(100, 150, kVerticalApproach), 40.0};
  setup.candidates = {make_candidate(0, plan_trajectory(setup.start, g, setup.scene, setup.gripper), {})};
  setup.mode = mode;
  setup.target = 0;
  return setup;
}

}  // namespace

TEST_CASE("zero command only advances the tick") {
  const auto s = at(100, 120, 30);
  const auto n = step(s, {Vec2::Zero(), s.pose.theta(), s.aperture}, GripperModel{}, block_scene());
  CHECK(n.tick == s.tick + 1);
  CHECK(n.pose == s.pose);
  CHECK(n.aperture == s.aperture);
}

TEST_CASE("constant velocity moves by v dt") {
  const auto s = at(100, 120, 30);
  const auto n = step(s, {Vec2(20, 0), s.pose.theta(), s.aperture}, GripperModel{}, block_scene());
  CHECK(n.pose.x() == doctest::Approx(101.0));
  CHECK(n.pose.y() == 120.0);
}

TEST_CASE("free-space motion is reversible") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(-50.0, 50.0);
  const GripperModel gripper;
  const Landscape scene = block_scene();
  for (int i = 0; i < 100; ++i) {
    const auto s = at(100 + unit(rng), 150 + unit(rng) / 2, 30);
    const Vec2 u(unit(rng), unit(rng));
    const auto fwd = step(s, {u, s.pose.theta(), s.aperture}, gripper, scene);
    const auto back = step(fwd, {-u, s.pose.theta(), s.aperture}, gripper, scene);
    CHECK((back.pose.p() - s.pose.p()).norm() < 1e-12);
  }
}

TEST_CASE("a finger driven into a block stops at the surface") {
  const GripperModel gripper;
  const Landscape scene = block_scene();
  // Pointing down, L1 is on the +x side; start it 2 mm right of the block's right face.
  const auto s = at(120 + 5 + 2 - gripper.finger_offset(60), 15, 60);
  const auto before = check_gripper_collision(s.pose, s.aperture, gripper, scene);
  REQUIRE_FALSE(before.penetrating());
  const auto n = step(s, {Vec2(-50, 0), s.pose.theta(), s.aperture}, gripper, scene);
  const auto report = check_gripper_collision(n.pose, n.aperture, gripper, scene);
  CHECK_FALSE(report.penetrating());
  // Circle-rectangle oracle: the clamped finger centre is one radius from the face.
  const Vec2 finger = link_poses(gripper, n.pose, n.aperture)[0].p();
  CHECK(std::abs(finger.x() - (120 + gripper.finger_radius)) < 1e-9);
}

TEST_CASE("random command sequences never penetrate") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const GripperModel gripper;
  Landscape scene = block_scene();
  scene.objects.push_back(make_rect(1, 160, 0, 20, 50));
  for (int run = 0; run < 20; ++run) {
    auto s = at(100, 80, 40);
    for (int t = 0; t < 300; ++t) {
      const Vec2 u(50 * unit(rng), 50 * unit(rng) - 20);
      const double theta = kVerticalApproach + 0.5 * unit(rng);
      s = step(s, {u, theta, s.aperture + 4 * unit(rng)}, gripper, scene);
      REQUIRE_FALSE(check_gripper_collision(s.pose, s.aperture, gripper, scene).penetrating());
    }
  }
}

TEST_CASE("grasp completion") {
  const GripperModel gripper;
  const Landscape scene = block_scene();
  const CandidateGrasp g{Pose2(100, 22, kVerticalApproach), 40.0, 1.0, 0};
  const auto exact = check_grasp_complete(at(100, 22, 40), g, gripper, scene);
  CHECK(exact.complete);
  CHECK(exact.position_error == 0.0);
  const auto lower = check_grasp_complete(at(100, 19, 40), g, gripper, scene);
  CHECK(lower.complete);
  CHECK(lower.position_error == doctest::Approx(3.0));
  const auto far = check_grasp_complete(at(100, 15, 40), g, gripper, scene);
  CHECK_FALSE(far.complete);
  CHECK(far.position_error == doctest::Approx(7.0));
  CandidateGrasp other = g;
  other.object_id = 4;
  CHECK_FALSE(check_grasp_complete(at(100, 22, 40), other, gripper, scene).complete);
}

TEST_CASE("assisted session follows the plan to completion") {
  auto setup = demo_setup(Mode::kAssisted);
  const auto& plan = setup.candidates[0].plan;
  Session s(setup);
  int tau = plan.horizon();
  while (!s.done()) {
    tau = nearest_waypoint(plan, s.state().pose.p(), tau);
    s.advance({plan.controls[tau], 0});
  }
  CHECK(s.complete());
  const auto o = s.outcome();
  CHECK(o.success);
  CHECK(o.position_error <= 5.0);
  CHECK(o.execution_time == doctest::Approx((s.state().tick - 1) * 0.05));
}

TEST_CASE("manual mode holds orientation and moves the aperture with keys") {
  auto setup = demo_setup(Mode::kManual);
  Session s(setup);
  s.advance({Vec2::Zero(), 0});
  s.advance({Vec2(0, -10), +1});
  CHECK(s.state().aperture == doctest::Approx(41.0));
  CHECK(s.state().pose.theta() == setup.start.pose.theta());
  CHECK(s.log()[1].selected == -1);
  s.advance({Vec2(0, -10), -1});
  CHECK(s.state().aperture == doctest::Approx(40.0));
  // Execution time counts from the first non-zero input.
  CHECK(s.outcome().execution_time == doctest::Approx(0.05));
}

TEST_CASE("replaying logged inputs reproduces the states bit-exactly") {
  auto setup = demo_setup(Mode::kAssisted);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 15.0);
  std::vector<OperatorInput> inputs;
  for (int i = 0; i < 200; ++i) inputs.push_back({Vec2(noise(rng), -30 + noise(rng)), 0});
  const auto first = run_inputs(setup, inputs);
  std::vector<OperatorInput> logged;
  for (const auto& t : first) logged.push_back(t.input);
  CHECK(run_inputs(setup, logged) == first);
}

TEST_CASE("a finished session rejects further input") {
  auto setup = demo_setup(Mode::kManual);
  setup.sim.max_ticks = 2;
  Session s(setup);
  s.advance({});
  s.advance({});
  CHECK(s.done());
  CHECK_THROWS_AS(s.advance({}), Error);
}
