#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sgw/grasp_density.hpp"
#include "sgw/sim.hpp"

namespace sgw {

enum class OperatorKind { kOracle, kNoisyProportional, kDistracted };

const char* to_string(OperatorKind k);
/// Accepts "oracle", "noisy-proportional" and "distracted-then-corrects".
OperatorKind operator_kind_from_string(const std::string& s);

struct OperatorConfig {
  OperatorKind kind = OperatorKind::kNoisyProportional;
  /// Per-axis noise standard deviation as a fraction of the speed limit.
  double noise_fraction = 0.3;
  /// Proportional gain toward the aimed grasp, 1/s.
  double gain = 2.0;
  /// Ticks between an observation and the action based on it.
  int reaction_delay = 0;
  /// Ticks spent steering toward the decoy before correcting.
  int distract_ticks = 20;
  /// In manual mode the operator starts closing the fingers within this distance, mm.
  double close_distance = 4.0;

  bool operator==(const OperatorConfig&) const = default;
};

struct ExperimentConfig {
  int n_trials = 20;
  std::uint64_t seed = 1;
  std::vector<Mode> modes{Mode::kManual, Mode::kAssisted};
  SceneParams scene;
  FeatureParams features;
  GripperModel gripper;
  ContactLearningParams learning;
  QueryParams query;
  SamplingParams sampling;
  int grasp_samples = 1500;
  PlannerParams planner;
  ControllerParams controller;
  SimParams sim;
  OperatorConfig op;
  /// Start pose height above the ground, mm; the gripper starts centred and pointing down.
  double start_height = 150.0;
  double start_aperture = 40.0;
  /// Worker threads; 0 uses the hardware concurrency. Does not affect results.
  int workers = 0;
  /// The run fails when more than this fraction of trials is infeasible.
  double max_infeasible_rate = 0.5;

  bool operator==(const ExperimentConfig&) const = default;
};

/// The built-in one-shot demonstration: a 40 x 30 mm block with a pinch grasp 8 mm below its top.
struct Demonstration {
  Landscape scene;
  Pose2 grasp;
  double aperture = 0.0;
};

Demonstration default_demonstration();
ContactModel learn_from_demonstration(const Demonstration& demo, const ExperimentConfig& cfg);

std::uint64_t trial_seed(std::uint64_t base, int trial);

/// Everything a trial needs; shared by the manual and assisted runs of the same index.
struct TrialSetup {
  int trial = 0;
  std::uint64_t scene_seed = 0;
  Landscape scene;
  std::vector<AssistCandidate> candidates;
  int target = 0;
  int target_object = 0;
  /// Candidate furthest from the target, when there is more than one.
  std::optional<int> decoy;
  Waypoint start;
};

/// Best-ranked plannable candidate per object, scene seeded from the trial
/// index. Returns nullopt with a reason when the target object has no
/// candidate or the scene yields no grasps at all.
std::optional<TrialSetup> prepare_trial(const ExperimentConfig& cfg, const ContactModel& model, int trial,
                                        std::string* reason = nullptr);

/// Candidates for an explicit scene and start.
std::vector<AssistCandidate> plan_candidates(const ExperimentConfig& cfg, const Landscape& scene,
                                             const std::vector<CandidateGrasp>& grasps, const Waypoint& start);

struct Observation {
  PlantState state;
  Mode mode = Mode::kAssisted;
};

/// Scripted stand-in for a human operator. Deterministic given its seed and observations.
class SyntheticOperator {
 public:
  SyntheticOperator(OperatorConfig cfg, double speed_limit, std::uint64_t seed, const TrajectoryPlan& target,
                    const TrajectoryPlan* decoy);

  OperatorInput act(const Observation& obs);

 private:
  OperatorInput manual_aperture(OperatorInput in, const PlantState& s, const CandidateGrasp& aim) const;

  OperatorConfig cfg_;
  double speed_limit_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};
  const TrajectoryPlan& target_;
  const TrajectoryPlan* decoy_;
  std::deque<PlantState> history_;
  int tau_;
  int ticks_ = 0;
};

TrialRecord run_trial(const ExperimentConfig& cfg, const TrialSetup& setup, Mode mode, const std::string& config_hash);

SessionSetup session_setup(const ExperimentConfig& cfg, const TrialSetup& trial, Mode mode);

/// Snapshot of a session, finished or not, as a replayable record.
TrialRecord make_record(const TrialSetup& trial, Mode mode, const std::string& config_hash, const Session& session);

struct ModeSummary {
  Mode mode = Mode::kAssisted;
  int n = 0;
  int n_success = 0;
  int penetrations = 0;
  double error_mean = 0.0;
  double error_std = 0.0;
  double time_mean = 0.0;
  double time_std = 0.0;
  /// Per feasible trial, in trial order.
  std::vector<double> errors;
  std::vector<double> times;
  std::vector<int> trials;

  bool operator==(const ModeSummary&) const = default;
};

struct ExperimentSummary {
  std::string config_hash;
  int n_trials = 0;
  std::vector<int> infeasible;
  std::vector<std::string> infeasible_reasons;
  std::vector<ModeSummary> modes;
  std::vector<TrialRecord> records;

  double infeasible_rate() const { return n_trials > 0 ? static_cast<double>(infeasible.size()) / n_trials : 0.0; }
  const ModeSummary* find(Mode m) const;
  bool operator==(const ExperimentSummary&) const = default;
};

/// FNV-1a of the canonical JSON encoding, ignoring the worker count.
std::string config_hash(const ExperimentConfig& cfg);

/// Runs every trial in every configured mode. Trials are spread over worker
/// threads; results are keyed by trial index so the summary does not depend on scheduling.
ExperimentSummary run_experiment(const ExperimentConfig& cfg, const ContactModel& model);

/// Rebuilds the trial from the config and re-feeds the logged inputs.
TrialRecord replay_record(const ExperimentConfig& cfg, const ContactModel& model, const TrialRecord& record);

/// Sample mean and standard deviation (n - 1 denominator, 0 for a single value).
std::pair<double, double> mean_std(const std::vector<double>& v);

struct Distribution {
  std::string mode;
  std::string metric;
  std::vector<double> values;
  double mean = 0.0;
  double std = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  std::vector<double> outliers;
};

/// Quartiles by linear interpolation; outliers lie beyond 1.5 IQR from the quartiles.
Distribution describe(const std::string& mode, const std::string& metric, const std::vector<double>& values);

}  // namespace sgw
