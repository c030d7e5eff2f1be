#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgw/controller.hpp"

namespace sgw {

enum class Mode { kManual, kAssisted };

const char* to_string(Mode m);
/// Throws FormatError for anything but "manual" or "assisted".
Mode mode_from_string(const std::string& s);

struct PlantState {
  Pose2 pose;
  double aperture = 0.0;
  int tick = 0;
  double dt = 0.05;

  bool operator==(const PlantState&) const = default;
};

struct PlantCommand {
  Vec2 velocity = Vec2::Zero();
  double theta = kVerticalApproach;
  double aperture = 0.0;
};

struct SimParams {
  double dt = 0.05;
  double speed_limit = 50.0;
  /// Opening or closing speed of the aperture keys in manual mode, mm/s.
  double aperture_rate = 20.0;
  double completion_tolerance = 5.0;
  int max_ticks = 800;

  bool operator==(const SimParams&) const = default;
};

/// Advances the kinematic plant one tick. A command that would make a finger
/// penetrate is resolved by pushing the gripper out along the contact normal;
/// if that fails the motion is cut back to the last penetration-free fraction.
PlantState step(const PlantState& state, const PlantCommand& command, const GripperModel& gripper,
                const Landscape& scene);

struct CompletionReport {
  bool complete = false;
  double position_error = 0.0;
};

CompletionReport check_grasp_complete(const PlantState& state, const CandidateGrasp& target,
                                      const GripperModel& gripper, const Landscape& scene, double tolerance = 5.0);

/// Raw operator input: planar velocity in mm/s and an aperture key direction (-1 close, +1 open).
struct OperatorInput {
  Vec2 velocity = Vec2::Zero();
  int aperture_dir = 0;

  bool is_zero() const { return velocity.isZero(0.0) && aperture_dir == 0; }
  bool operator==(const OperatorInput&) const = default;
};

struct TickLog {
  int tick = 0;
  OperatorInput input;
  Vec2 command = Vec2::Zero();
  /// Candidate id chosen by arbitration; -1 in manual mode.
  int selected = -1;
  std::vector<double> costs;
  /// Feedback command before blending, its blend weight and the selected plan's time-to-go.
  Vec2 lqr_command = Vec2::Zero();
  double alpha = 0.0;
  int waypoint = -1;
  /// Plant state after the tick.
  PlantState state;

  bool operator==(const TickLog&) const = default;
};

struct Outcome {
  double position_error = 0.0;
  double execution_time = 0.0;
  bool success = false;
  int ticks = 0;

  bool operator==(const Outcome&) const = default;
};

struct SessionSetup {
  Landscape scene;
  GripperModel gripper;
  std::vector<AssistCandidate> candidates;
  Waypoint start;
  Mode mode = Mode::kAssisted;
  SimParams sim;
  ControllerParams controller;
  /// Index of the intended candidate; without one any candidate completes the trial.
  std::optional<int> target;
};

/// Single-threaded tick loop owning the plant, the arbitrator and the log.
class Session {
 public:
  explicit Session(SessionSetup setup);

  const TickLog& advance(const OperatorInput& input);

  const SessionSetup& setup() const { return setup_; }
  const PlantState& state() const { return state_; }
  const std::vector<TickLog>& log() const { return log_; }
  const std::optional<ArbitrationResult>& last_arbitration() const { return last_; }
  bool done() const { return done_; }
  bool complete() const { return complete_; }
  /// Candidate index the position error is measured against.
  int reference_candidate() const;
  Outcome outcome() const;

 private:
  SessionSetup setup_;
  std::optional<Arbitrator> arbitrator_;
  PlantState state_;
  std::vector<TickLog> log_;
  std::optional<ArbitrationResult> last_;
  int first_input_tick_ = -1;
  int completed_on_ = -1;
  bool done_ = false;
  bool complete_ = false;
};

/// Runs a session on a fixed input sequence, stopping early once it is done.
std::vector<TickLog> run_inputs(const SessionSetup& setup, std::span<const OperatorInput> inputs);

struct TrialRecord {
  int trial = 0;
  std::uint64_t scene_seed = 0;
  int target_object = 0;
  int target_grasp = 0;
  Mode mode = Mode::kAssisted;
  std::string config_hash;
  std::vector<TickLog> ticks;
  Outcome outcome;
  bool aborted = false;

  bool operator==(const TrialRecord&) const = default;
};

}  // namespace sgw
