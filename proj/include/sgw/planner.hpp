#pragma once

#include <vector>

#include "sgw/grasp_density.hpp"
#include "sgw/gripper.hpp"
#include "sgw/scene.hpp"

namespace sgw {

struct Waypoint {
  Pose2 pose;
  double aperture = 0.0;

  bool operator==(const Waypoint&) const = default;
};

/// Straight-line reach-to-grasp plan indexed by time-to-go: waypoints[0] is
/// the grasp, waypoints[horizon()] the start. controls[tau] moves the gripper
/// from waypoint tau to waypoint tau - 1 in one step of dt; controls[0] is zero.
struct TrajectoryPlan {
  CandidateGrasp grasp;
  std::vector<Waypoint> waypoints;
  std::vector<Vec2> controls;
  double dt = 0.05;

  int horizon() const { return static_cast<int>(waypoints.size()) - 1; }
  const Waypoint& at(int tau) const { return waypoints.at(tau); }
  /// Waypoint reached after applying controls[tau].
  const Waypoint& next(int tau) const { return waypoints.at(tau > 0 ? tau - 1 : 0); }

  bool operator==(const TrajectoryPlan&) const = default;
};

struct PlannerParams {
  /// Upper bound on the spacing between consecutive waypoints, in mm.
  double step_length = 2.0;
  double dt = 0.05;
  /// Extra opening kept during the approach, in mm.
  double pregrasp_margin = 12.0;
  /// Length of the final segment over which the fingers close, in mm.
  double close_distance = 10.0;
  double tilt_step = 5.0 * kPi / 180.0;

  bool operator==(const PlannerParams&) const = default;
};

/// Interface for reach-to-grasp planners; the straight-line planner is the only one shipped.
class Planner {
 public:
  virtual ~Planner() = default;
  virtual TrajectoryPlan plan(const Waypoint& start, const CandidateGrasp& grasp, const Landscape& scene,
                              const GripperModel& gripper) const = 0;
};

class StraightLinePlanner : public Planner {
 public:
  explicit StraightLinePlanner(PlannerParams params = {}) : params_(params) {}
  TrajectoryPlan plan(const Waypoint& start, const CandidateGrasp& grasp, const Landscape& scene,
                      const GripperModel& gripper) const override;

 private:
  PlannerParams params_;
};

/// Positions are interpolated on the line; orientation follows the shortest
/// angular path and the fingers stay open by the pregrasp margin until the
/// last close_distance mm. A colliding waypoint is repaired by tilting
/// towards a vertical approach, then widening, then narrowing the fingers.
/// Throws PlanningError naming the time-to-go index that could not be repaired.
TrajectoryPlan plan_trajectory(const Waypoint& start, const CandidateGrasp& grasp, const Landscape& scene,
                               const GripperModel& gripper, const PlannerParams& params = {});

}  // namespace sgw
