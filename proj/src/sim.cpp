#include "sgw/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "sgw/error.hpp"

namespace sgw {

const char* to_string(Mode m) { return m == Mode::kManual ? "manual" : "assisted"; }

Mode mode_from_string(const std::string& s) {
  if (s == "manual") return Mode::kManual;
  if (s == "assisted") return Mode::kAssisted;
  throw FormatError("unknown mode '" + s + "'");
}

namespace {

constexpr int kPushIterations = 8;
constexpr int kBisectIterations = 40;

bool clear(const Pose2& pose, double aperture, const GripperModel& gripper, const Landscape& scene) {
  return !check_gripper_collision(pose, aperture, gripper, scene).penetrating();
}

}  // namespace

PlantState step(const PlantState& state, const PlantCommand& command, const GripperModel& gripper,
                const Landscape& scene) {
  PlantState next = state;
  ++next.tick;
  const double aperture = std::clamp(command.aperture, gripper.min_aperture, gripper.max_aperture);
  const Vec2 target = state.pose.p() + command.velocity * state.dt;
  if (clear(Pose2(target, command.theta), aperture, gripper, scene)) {
    next.pose = Pose2(target, command.theta);
    next.aperture = aperture;
    return next;
  }

  Vec2 p = target;
  for (int it = 0; it < kPushIterations; ++it) {
    const auto report = check_gripper_collision(Pose2(p, command.theta), aperture, gripper, scene);
    if (!report.penetrating()) {
      next.pose = Pose2(p, command.theta);
      next.aperture = aperture;
      return next;
    }
    const LinkContact& deepest = report.links[0].gap <= report.links[1].gap ? report.links[0] : report.links[1];
    p -= deepest.gap * deepest.normal;
  }
  if (clear(Pose2(p, command.theta), aperture, gripper, scene)) {
    next.pose = Pose2(p, command.theta);
    next.aperture = aperture;
    return next;
  }

  const double turn = angle_diff(command.theta, state.pose.theta());
  auto blend = [&](double s) {
    return std::make_pair(Pose2(state.pose.p() + s * (target - state.pose.p()), state.pose.theta() + s * turn),
                          state.aperture + s * (aperture - state.aperture));
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < kBisectIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto [pose, a] = blend(mid);
    (clear(pose, a, gripper, scene) ? lo : hi) = mid;
  }
  if (lo > 0.0) {
    std::tie(next.pose, next.aperture) = blend(lo);
  } else {
    next.pose = state.pose;
    next.aperture = state.aperture;
  }
  return next;
}

CompletionReport check_grasp_complete(const PlantState& state, const CandidateGrasp& target,
                                      const GripperModel& gripper, const Landscape& scene, double tolerance) {
  CompletionReport r;
  r.position_error = (state.pose.p() - target.pose.p()).norm();
  const auto report = check_gripper_collision(state.pose, state.aperture, gripper, scene);
  r.complete = report.both_touching(target.object_id) && r.position_error <= tolerance;
  return r;
}

Session::Session(SessionSetup setup) : setup_(std::move(setup)) {
  if (setup_.candidates.empty()) throw Error("a session needs at least one candidate grasp");
  if (setup_.target && (*setup_.target < 0 || *setup_.target >= static_cast<int>(setup_.candidates.size())))
    throw Error("target candidate index out of range");
  state_.pose = setup_.start.pose;
  state_.aperture = setup_.start.aperture;
  state_.dt = setup_.sim.dt;
  if (setup_.mode == Mode::kAssisted) {
    ControllerParams params = setup_.controller;
    params.speed_limit = setup_.sim.speed_limit;
    arbitrator_.emplace(setup_.candidates, params, setup_.sim.dt);
  }
}

const TickLog& Session::advance(const OperatorInput& input) {
  if (done_) throw Error("session already finished");
  TickLog entry;
  entry.input = input;
  PlantCommand cmd;
  if (arbitrator_) {
    last_ = arbitrator_->step(to_state(state_.pose), input.velocity);
    cmd = {last_->command, last_->theta, last_->aperture};
    // Assistance shapes the operator's motion; it never moves the gripper on its own.
    if (input.velocity.isZero(0.0)) cmd = {Vec2::Zero(), state_.pose.theta(), state_.aperture};
    entry.selected = setup_.candidates[last_->selected].id;
    entry.costs = last_->costs;
    entry.lqr_command = last_->lqr_command;
    entry.alpha = last_->alpha;
    entry.waypoint = last_->waypoint;
  } else {
    const double a = state_.aperture + input.aperture_dir * setup_.sim.aperture_rate * setup_.sim.dt;
    cmd = {saturate(input.velocity, setup_.sim.speed_limit), setup_.start.pose.theta(), a};
  }
  entry.command = cmd.velocity;
  state_ = step(state_, cmd, setup_.gripper, setup_.scene);
  entry.tick = state_.tick;
  entry.state = state_;
  if (first_input_tick_ < 0 && !input.is_zero()) first_input_tick_ = state_.tick;

  const double tol = setup_.sim.completion_tolerance;
  if (setup_.target) {
    if (check_grasp_complete(state_, setup_.candidates[*setup_.target].plan.grasp, setup_.gripper, setup_.scene, tol)
            .complete)
      completed_on_ = *setup_.target;
  } else {
    for (std::size_t i = 0; i < setup_.candidates.size() && completed_on_ < 0; ++i) {
      if (check_grasp_complete(state_, setup_.candidates[i].plan.grasp, setup_.gripper, setup_.scene, tol).complete)
        completed_on_ = static_cast<int>(i);
    }
  }
  complete_ = completed_on_ >= 0;
  done_ = complete_ || state_.tick >= setup_.sim.max_ticks;
  log_.push_back(std::move(entry));
  return log_.back();
}

int Session::reference_candidate() const {
  if (completed_on_ >= 0) return completed_on_;
  if (setup_.target) return *setup_.target;
  if (last_) return last_->selected;
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < setup_.candidates.size(); ++i) {
    const double d = (state_.pose.p() - setup_.candidates[i].plan.grasp.pose.p()).norm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

Outcome Session::outcome() const {
  Outcome o;
  o.position_error = (state_.pose.p() - setup_.candidates[reference_candidate()].plan.grasp.pose.p()).norm();
  o.success = complete_;
  o.ticks = state_.tick;
  if (first_input_tick_ >= 0) o.execution_time = (state_.tick - first_input_tick_) * setup_.sim.dt;
  return o;
}

std::vector<TickLog> run_inputs(const SessionSetup& setup, std::span<const OperatorInput> inputs) {
  Session s(setup);
  for (const auto& in : inputs) {
    if (s.done()) break;
    s.advance(in);
  }
  return s.log();
}

}  // namespace sgw
