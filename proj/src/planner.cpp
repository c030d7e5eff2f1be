#include "sgw/planner.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "sgw/error.hpp"

namespace sgw {

namespace {

bool clear(const Pose2& pose, double aperture, const GripperModel& gripper, const Landscape& scene) {
  return !check_gripper_collision(pose, aperture, gripper, scene).penetrating();
}

std::vector<double> tilt_candidates(double nominal, double step) {
  std::vector<double> out{nominal};
  const double to_vertical = angle_diff(kVerticalApproach, nominal);
  const int n = static_cast<int>(std::ceil(std::abs(to_vertical) / step - 1e-9));
  for (int i = 1; i < n; ++i) out.push_back(nominal + std::copysign(i * step, to_vertical));
  if (n > 0) out.push_back(kVerticalApproach);
  return out;
}

std::optional<Waypoint> repair(const Vec2& position, double theta, double aperture, double floor_aperture,
                               const GripperModel& gripper, const Landscape& scene, double tilt_step) {
  const auto tilts = tilt_candidates(theta, tilt_step);
  for (double t : tilts) {
    if (clear(Pose2(position, t), aperture, gripper, scene)) return Waypoint{Pose2(position, t), aperture};
  }
  for (double t : tilts) {
    for (double a = aperture + 1.0; a <= gripper.max_aperture + 1e-9; a += 1.0) {
      if (clear(Pose2(position, t), a, gripper, scene)) return Waypoint{Pose2(position, t), a};
    }
  }
  for (double t : tilts) {
    for (double a = aperture - 1.0; a >= floor_aperture - 1e-9; a -= 1.0) {
      const double aa = std::max(a, floor_aperture);
      if (clear(Pose2(position, t), aa, gripper, scene)) return Waypoint{Pose2(position, t), aa};
    }
  }
  return std::nullopt;
}

}  // namespace

TrajectoryPlan plan_trajectory(const Waypoint& start, const CandidateGrasp& grasp, const Landscape& scene,
                               const GripperModel& gripper, const PlannerParams& params) {
  TrajectoryPlan plan;
  plan.grasp = grasp;
  plan.dt = params.dt;

  const Vec2 delta = grasp.pose.p() - start.pose.p();
  const double distance = delta.norm();
  const int horizon = distance > 0.0 ? static_cast<int>(std::ceil(distance / params.step_length - 1e-9)) : 0;

  if (!clear(start.pose, start.aperture, gripper, scene))
    throw PlanningError("start configuration penetrates the scene", horizon);
  if (!clear(grasp.pose, grasp.aperture, gripper, scene))
    throw PlanningError("grasp configuration penetrates the scene", 0);

  const double pregrasp = std::clamp(grasp.aperture + params.pregrasp_margin, gripper.min_aperture, gripper.max_aperture);
  const double turn = angle_diff(grasp.pose.theta(), start.pose.theta());

  plan.waypoints.resize(horizon + 1);
  plan.waypoints[0] = {grasp.pose, grasp.aperture};
  if (horizon > 0) plan.waypoints[horizon] = start;
  for (int tau = horizon - 1; tau >= 1; --tau) {
    const double s = static_cast<double>(horizon - tau) / horizon;
    const Vec2 position = start.pose.p() + s * delta;
    const double theta = start.pose.theta() + s * turn;
    const double remaining = distance * tau / horizon;
    double aperture;
    if (remaining <= params.close_distance) {
      aperture = grasp.aperture + (pregrasp - grasp.aperture) * remaining / params.close_distance;
    } else {
      const double far = std::max(distance - params.close_distance, 1e-12);
      aperture = start.aperture + (pregrasp - start.aperture) * std::min(1.0, (distance - remaining) / far);
    }
    if (clear(Pose2(position, theta), aperture, gripper, scene)) {
      plan.waypoints[tau] = {Pose2(position, theta), aperture};
      continue;
    }
    const auto fixed = repair(position, theta, aperture, grasp.aperture, gripper, scene, params.tilt_step);
    if (!fixed)
      throw PlanningError("no collision-free orientation or aperture at waypoint " + std::to_string(tau), tau);
    plan.waypoints[tau] = *fixed;
  }

  plan.controls.assign(horizon + 1, Vec2::Zero());
  for (int tau = 1; tau <= horizon; ++tau)
    plan.controls[tau] = (plan.waypoints[tau - 1].pose.p() - plan.waypoints[tau].pose.p()) / params.dt;
  return plan;
}

TrajectoryPlan StraightLinePlanner::plan(const Waypoint& start, const CandidateGrasp& grasp, const Landscape& scene,
                                         const GripperModel& gripper) const {
  return plan_trajectory(start, grasp, scene, gripper, params_);
}

}  // namespace sgw
