#include "sgw/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "sgw/error.hpp"
#include "sgw/io.hpp"

namespace sgw {

namespace {

// Independent random streams derived from one trial seed.
constexpr std::uint64_t kTargetStream = 0x7a3c1e55d2b94f01ULL;
constexpr std::uint64_t kSamplingStream = 0x1f83d9abfb41bd6bULL;
constexpr std::uint64_t kOperatorStream = 0x5be0cd19137e2179ULL;

// Extra opening a manual operator keeps while approaching, mm.
constexpr double kManualPregraspMargin = 12.0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::kOracle:
      return "oracle";
    case OperatorKind::kNoisyProportional:
      return "noisy-proportional";
    case OperatorKind::kDistracted:
      return "distracted-then-corrects";
  }
  return "unknown";
}

OperatorKind operator_kind_from_string(const std::string& s) {
  if (s == "oracle") return OperatorKind::kOracle;
  if (s == "noisy-proportional") return OperatorKind::kNoisyProportional;
  if (s == "distracted-then-corrects") return OperatorKind::kDistracted;
  throw FormatError("unknown operator kind '" + s + "'");
}

Demonstration default_demonstration() {
  Demonstration d;
  d.scene.width = 200;
  Obstacle block;
  block.id = 0;
  block.center = {100, 15};
  block.half_extents = {20, 15};
  d.scene.objects = {block};
  d.grasp = Pose2(100, 22, kVerticalApproach);
  d.aperture = 40;
  return d;
}

ContactModel learn_from_demonstration(const Demonstration& demo, const ExperimentConfig& cfg) {
  return learn_contact_model(extract_features(demo.scene, cfg.features), demo.grasp, demo.aperture, cfg.gripper,
                             cfg.learning);
}

std::uint64_t trial_seed(std::uint64_t base, int trial) {
  return splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(trial)));
}

std::vector<AssistCandidate> plan_candidates(const ExperimentConfig& cfg, const Landscape& scene,
                                             const std::vector<CandidateGrasp>& grasps, const Waypoint& start) {
  PlannerParams planner = cfg.planner;
  planner.dt = cfg.sim.dt;
  ControllerParams controller = cfg.controller;
  controller.speed_limit = cfg.sim.speed_limit;
  std::vector<AssistCandidate> out;
  for (const auto& object : scene.objects) {
    for (const auto& g : grasps) {
      if (g.object_id != object.id) continue;
      try {
        out.push_back(make_candidate(static_cast<int>(out.size()),
                                     plan_trajectory(start, g, scene, cfg.gripper, planner), controller));
        break;
      } catch (const PlanningError&) {
      }
    }
  }
  return out;
}

std::optional<TrialSetup> prepare_trial(const ExperimentConfig& cfg, const ContactModel& model, int trial,
                                        std::string* reason) {
  auto fail = [&](const std::string& why) -> std::optional<TrialSetup> {
    if (reason) *reason = why;
    return std::nullopt;
  };
  TrialSetup t;
  t.trial = trial;
  t.scene_seed = trial_seed(cfg.seed, trial);
  try {
    t.scene = generate_scene(t.scene_seed, cfg.scene);
  } catch (const SceneGenerationError& e) {
    return fail(e.what());
  }
  std::mt19937_64 pick(t.scene_seed ^ kTargetStream);
  t.target_object = t.scene.objects[std::uniform_int_distribution<std::size_t>(0, t.scene.objects.size() - 1)(pick)].id;
  t.start = {Pose2(t.scene.width / 2, t.scene.ground_y + cfg.start_height, kVerticalApproach), cfg.start_aperture};

  std::vector<CandidateGrasp> grasps;
  try {
    const auto density = build_query_density(model, extract_features(t.scene, cfg.features), cfg.query);
    grasps = sample_grasps(density, cfg.gripper, t.scene, cfg.grasp_samples, t.scene_seed ^ kSamplingStream,
                           cfg.sampling);
  } catch (const EmptyDensityError& e) {
    return fail(e.what());
  } catch (const NoGraspError& e) {
    return fail(e.what());
  }
  t.candidates = plan_candidates(cfg, t.scene, grasps, t.start);
  const auto it = std::find_if(t.candidates.begin(), t.candidates.end(),
                               [&](const AssistCandidate& c) { return c.plan.grasp.object_id == t.target_object; });
  if (it == t.candidates.end())
    return fail("no plannable candidate grasp on target object " + std::to_string(t.target_object));
  t.target = static_cast<int>(it - t.candidates.begin());

  double far = -1.0;
  for (std::size_t i = 0; i < t.candidates.size(); ++i) {
    if (static_cast<int>(i) == t.target) continue;
    const double d = (t.candidates[i].plan.grasp.pose.p() - it->plan.grasp.pose.p()).norm();
    if (d > far) {
      far = d;
      t.decoy = static_cast<int>(i);
    }
  }
  return t;
}

SyntheticOperator::SyntheticOperator(OperatorConfig cfg, double speed_limit, std::uint64_t seed,
                                     const TrajectoryPlan& target, const TrajectoryPlan* decoy)
    : cfg_(cfg), speed_limit_(speed_limit), rng_(seed), target_(target), decoy_(decoy), tau_(target.horizon()) {}

OperatorInput SyntheticOperator::manual_aperture(OperatorInput in, const PlantState& s,
                                                 const CandidateGrasp& aim) const {
  const double dist = (s.pose.p() - aim.pose.p()).norm();
  if (dist <= cfg_.close_distance) {
    in.aperture_dir = -1;
    return in;
  }
  const double desired = aim.aperture + kManualPregraspMargin;
  if (std::abs(desired - s.aperture) > 0.5) in.aperture_dir = desired > s.aperture ? 1 : -1;
  return in;
}

OperatorInput SyntheticOperator::act(const Observation& obs) {
  history_.push_back(obs.state);
  while (static_cast<int>(history_.size()) > cfg_.reaction_delay + 1) history_.pop_front();
  const PlantState& seen = history_.front();
  ++ticks_;
  // Both noise draws happen every tick so paired runs consume identical streams.
  const Vec2 noise(noise_(rng_), noise_(rng_));

  OperatorInput in;
  if (cfg_.kind == OperatorKind::kOracle) {
    tau_ = nearest_waypoint(target_, seen.pose.p(), tau_);
    in.velocity = target_.controls[tau_];
    if (obs.mode == Mode::kManual) {
      const double desired = target_.next(tau_).aperture;
      if (std::abs(desired - seen.aperture) > 0.5) in.aperture_dir = desired > seen.aperture ? 1 : -1;
    }
    return in;
  }
  const bool distracted = cfg_.kind == OperatorKind::kDistracted && decoy_ && ticks_ <= cfg_.distract_ticks;
  const CandidateGrasp& aim = distracted ? decoy_->grasp : target_.grasp;
  in.velocity = saturate(cfg_.gain * (aim.pose.p() - seen.pose.p()), speed_limit_) +
                cfg_.noise_fraction * speed_limit_ * noise;
  if (obs.mode == Mode::kManual) in = manual_aperture(in, seen, aim);
  return in;
}

SessionSetup session_setup(const ExperimentConfig& cfg, const TrialSetup& trial, Mode mode) {
  SessionSetup s;
  s.scene = trial.scene;
  s.gripper = cfg.gripper;
  s.candidates = trial.candidates;
  s.start = trial.start;
  s.mode = mode;
  s.sim = cfg.sim;
  s.controller = cfg.controller;
  s.controller.speed_limit = cfg.sim.speed_limit;
  s.target = trial.target;
  return s;
}

TrialRecord make_record(const TrialSetup& trial, Mode mode, const std::string& hash, const Session& session) {
  TrialRecord r;
  r.trial = trial.trial;
  r.scene_seed = trial.scene_seed;
  r.target_object = trial.target_object;
  r.target_grasp = trial.candidates[trial.target].id;
  r.mode = mode;
  r.config_hash = hash;
  r.ticks = session.log();
  r.outcome = session.outcome();
  return r;
}

TrialRecord run_trial(const ExperimentConfig& cfg, const TrialSetup& trial, Mode mode,
                      const std::string& config_hash) {
  Session session(session_setup(cfg, trial, mode));
  const TrajectoryPlan* decoy = trial.decoy ? &trial.candidates[*trial.decoy].plan : nullptr;
  SyntheticOperator op(cfg.op, cfg.sim.speed_limit, trial.scene_seed ^ kOperatorStream,
                       trial.candidates[trial.target].plan, decoy);
  while (!session.done()) session.advance(op.act({session.state(), mode}));
  return make_record(trial, mode, config_hash, session);
}

TrialRecord replay_record(const ExperimentConfig& cfg, const ContactModel& model, const TrialRecord& record) {
  std::string why;
  const auto trial = prepare_trial(cfg, model, record.trial, &why);
  if (!trial) throw Error("trial " + std::to_string(record.trial) + " is infeasible under this config: " + why);
  Session session(session_setup(cfg, *trial, record.mode));
  for (const auto& t : record.ticks) {
    if (session.done()) break;
    session.advance(t.input);
  }
  auto again = make_record(*trial, record.mode, record.config_hash, session);
  again.aborted = record.aborted;
  return again;
}

std::string config_hash(const ExperimentConfig& cfg) {
  Json j = to_json(cfg);
  j.erase("workers");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

Distribution describe(const std::string& mode, const std::string& metric, const std::vector<double>& values) {
  Distribution d;
  d.mode = mode;
  d.metric = metric;
  d.values = values;
  std::tie(d.mean, d.std) = mean_std(values);
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  d.q1 = quantile(sorted, 0.25);
  d.median = quantile(sorted, 0.5);
  d.q3 = quantile(sorted, 0.75);
  const double iqr = d.q3 - d.q1;
  for (double v : values) {
    if (v < d.q1 - 1.5 * iqr || v > d.q3 + 1.5 * iqr) d.outliers.push_back(v);
  }
  return d;
}

const ModeSummary* ExperimentSummary::find(Mode m) const {
  for (const auto& s : modes) {
    if (s.mode == m) return &s;
  }
  return nullptr;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg, const ContactModel& model) {
  const std::string hash = config_hash(cfg);
  const int n = cfg.n_trials;
  struct TrialResult {
    std::vector<TrialRecord> records;
    std::vector<int> penetrations;
    bool feasible = false;
    std::string infeasible;
  };
  std::vector<std::optional<TrialResult>> results(n);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      TrialResult result;
      const auto trial = prepare_trial(cfg, model, i, &result.infeasible);
      if (!trial) {
        results[i] = std::move(result);
        continue;
      }
      result.feasible = true;
      for (Mode m : cfg.modes) {
        result.records.push_back(run_trial(cfg, *trial, m, hash));
        int bad = 0;
        for (const auto& t : result.records.back().ticks)
          bad += check_gripper_collision(t.state.pose, t.state.aperture, cfg.gripper, trial->scene).penetrating();
        result.penetrations.push_back(bad);
      }
      results[i] = std::move(result);
    }
  };
  const int workers =
      std::clamp(cfg.workers > 0 ? cfg.workers : static_cast<int>(std::thread::hardware_concurrency()), 1,
                 std::max(1, n));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ExperimentSummary s;
  s.config_hash = hash;
  s.n_trials = n;
  for (Mode m : cfg.modes) {
    ModeSummary ms;
    ms.mode = m;
    s.modes.push_back(ms);
  }
  for (int i = 0; i < n; ++i) {
    if (!results[i]->feasible) {
      s.infeasible.push_back(i);
      s.infeasible_reasons.push_back(results[i]->infeasible);
      continue;
    }
    for (std::size_t k = 0; k < cfg.modes.size(); ++k) {
      auto& ms = s.modes[k];
      const auto& r = results[i]->records[k];
      ++ms.n;
      ms.n_success += r.outcome.success ? 1 : 0;
      ms.penetrations += results[i]->penetrations[k];
      ms.errors.push_back(r.outcome.position_error);
      ms.times.push_back(r.outcome.execution_time);
      ms.trials.push_back(i);
      s.records.push_back(r);
    }
  }
  for (auto& ms : s.modes) {
    std::tie(ms.error_mean, ms.error_std) = mean_std(ms.errors);
    std::tie(ms.time_mean, ms.time_std) = mean_std(ms.times);
  }
  return s;
}

}  // namespace sgw
