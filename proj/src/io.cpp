#include "sgw/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "sgw/error.hpp"

namespace sgw {

namespace {

Json vec(const Vec2& v) { return Json::array({v.x(), v.y()}); }

Vec2 vec_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw FormatError("expected a 2-vector, got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad value for '") + key + "': " + e.what());
  }
}

// Overwrites `out` only when the key is present.
template <typename T>
void optional_field(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = field<T>(j, key);
}

void only_keys(const Json& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) throw FormatError(std::string(what) + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw FormatError(std::string("unknown key '") + k + "' in " + what);
  }
}

const char* shape_name(ShapeKind k) { return k == ShapeKind::kCircle ? "circle" : "rectangle"; }

ShapeKind shape_from(const std::string& s) {
  if (s == "rectangle") return ShapeKind::kRectangle;
  if (s == "circle") return ShapeKind::kCircle;
  throw FormatError("unknown shape '" + s + "'");
}

Json kernel_json(const Kernel& k) {
  return {{"mu", to_json(k.mu)}, {"mu_r", k.mu_r}, {"weight", k.weight}};
}

Kernel kernel_from(const Json& j, const Bandwidth& bw) {
  Kernel k;
  k.mu = pose_from_json(j.at("mu"));
  k.mu_r = field<double>(j, "mu_r");
  k.weight = field<double>(j, "weight");
  k.sigma = bw;
  return k;
}

Json bandwidth_json(const Bandwidth& b) { return {{"p", b.p}, {"theta", b.theta}, {"r", b.r}}; }

Bandwidth bandwidth_from(const Json& j) {
  only_keys(j, {"p", "theta", "r"}, "bandwidth");
  Bandwidth b;
  optional_field(j, "p", b.p);
  optional_field(j, "theta", b.theta);
  optional_field(j, "r", b.r);
  return b;
}

Json grasp_json(const CandidateGrasp& g) {
  return {{"pose", to_json(g.pose)}, {"aperture", g.aperture}, {"score", g.score}, {"object_id", g.object_id}};
}

CandidateGrasp grasp_from(const Json& j) {
  return {pose_from_json(j.at("pose")), field<double>(j, "aperture"), field<double>(j, "score"),
          field<int>(j, "object_id")};
}

template <int R, int C>
Json matrix_json(const Eigen::Matrix<double, R, C>& m) {
  Json rows = Json::array();
  for (int i = 0; i < R; ++i) {
    Json row = Json::array();
    for (int k = 0; k < C; ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

template <int R, int C>
Eigen::Matrix<double, R, C> matrix_from(const Json& j) {
  if (!j.is_array() || j.size() != R) throw FormatError("matrix has the wrong number of rows");
  Eigen::Matrix<double, R, C> m;
  for (int i = 0; i < R; ++i) {
    if (!j[i].is_array() || j[i].size() != C) throw FormatError("matrix has the wrong number of columns");
    for (int k = 0; k < C; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

Json state_json(const PlantState& s) {
  return {{"pose", to_json(s.pose)}, {"aperture", s.aperture}, {"tick", s.tick}, {"dt", s.dt}};
}

PlantState state_from(const Json& j) {
  PlantState s;
  s.pose = pose_from_json(j.at("pose"));
  s.aperture = field<double>(j, "aperture");
  s.tick = field<int>(j, "tick");
  s.dt = field<double>(j, "dt");
  return s;
}

Json outcome_json(const Outcome& o) {
  return {{"position_error", o.position_error},
          {"execution_time", o.execution_time},
          {"success", o.success},
          {"ticks", o.ticks}};
}

Outcome outcome_from(const Json& j) {
  return {field<double>(j, "position_error"), field<double>(j, "execution_time"), field<bool>(j, "success"),
          field<int>(j, "ticks")};
}

}  // namespace

Json envelope(const char* format, Json body) {
  body["format"] = format;
  body["version"] = kFormatVersion;
  return body;
}

void check_envelope(const Json& j, const char* format) {
  if (!j.is_object()) throw FormatError(std::string("expected a ") + format + " object");
  if (!j.contains("format") || j["format"] != format)
    throw FormatError(std::string("expected format '") + format + "', got " +
                      (j.contains("format") ? j["format"].dump() : "none"));
  if (!j.contains("version") || j["version"] != kFormatVersion)
    throw FormatError(std::string("unsupported ") + format + " version " +
                      (j.contains("version") ? j["version"].dump() : "none"));
}

Json to_json(const Pose2& p) { return Json::array({p.x(), p.y(), p.theta()}); }

Pose2 pose_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected a pose [x, y, theta], got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json to_json(const Landscape& scene) {
  Json objects = Json::array();
  for (const auto& o : scene.objects) {
    Json jo{{"id", o.id}, {"shape", shape_name(o.kind)}, {"center", vec(o.center)}};
    if (o.kind == ShapeKind::kCircle) {
      jo["radius"] = o.radius;
    } else {
      jo["half_extents"] = vec(o.half_extents);
      jo["rotation"] = o.rotation;
    }
    objects.push_back(jo);
  }
  return envelope(format::kScene, {{"width", scene.width},
                                   {"ground_y", scene.ground_y},
                                   {"resolution", scene.resolution},
                                   {"objects", objects}});
}

Landscape scene_from_json(const Json& j) {
  check_envelope(j, format::kScene);
  Landscape s;
  s.width = field<double>(j, "width");
  s.ground_y = field<double>(j, "ground_y");
  s.resolution = field<double>(j, "resolution");
  for (const auto& jo : j.at("objects")) {
    Obstacle o;
    o.id = field<int>(jo, "id");
    o.kind = shape_from(field<std::string>(jo, "shape"));
    o.center = vec_from(jo.at("center"));
    if (o.kind == ShapeKind::kCircle) {
      o.radius = field<double>(jo, "radius");
    } else {
      o.half_extents = vec_from(jo.at("half_extents"));
      optional_field(jo, "rotation", o.rotation);
    }
    s.objects.push_back(o);
  }
  return s;
}

Json to_json(const GripperModel& g) {
  return {{"finger_radius", g.finger_radius},
          {"min_aperture", g.min_aperture},
          {"max_aperture", g.max_aperture},
          {"approach_cone", g.approach_cone},
          {"contact_tolerance", g.contact_tolerance},
          {"penetration_tolerance", g.penetration_tolerance}};
}

GripperModel gripper_from_json(const Json& j) {
  only_keys(j,
            {"finger_radius", "min_aperture", "max_aperture", "approach_cone", "contact_tolerance",
             "penetration_tolerance"},
            "gripper");
  GripperModel g;
  optional_field(j, "finger_radius", g.finger_radius);
  optional_field(j, "min_aperture", g.min_aperture);
  optional_field(j, "max_aperture", g.max_aperture);
  optional_field(j, "approach_cone", g.approach_cone);
  optional_field(j, "contact_tolerance", g.contact_tolerance);
  optional_field(j, "penetration_tolerance", g.penetration_tolerance);
  return g;
}

Json to_json(const ContactModel& m) {
  Json links = Json::array();
  for (const auto& link : m.links) {
    Json ks = Json::array();
    for (const auto& k : link) ks.push_back(kernel_json(k));
    links.push_back(ks);
  }
  return envelope(format::kContactModel, {{"cutoff", m.cutoff},
                                          {"decay", m.decay},
                                          {"normalizer", {m.normalizer[0], m.normalizer[1]}},
                                          {"bandwidth", bandwidth_json(m.bandwidth)},
                                          {"gripper", to_json(m.gripper)},
                                          {"links", links}});
}

ContactModel contact_model_from_json(const Json& j) {
  check_envelope(j, format::kContactModel);
  ContactModel m;
  m.cutoff = field<double>(j, "cutoff");
  m.decay = field<double>(j, "decay");
  const auto& z = j.at("normalizer");
  m.normalizer = {z.at(0).get<double>(), z.at(1).get<double>()};
  m.bandwidth = bandwidth_from(j.at("bandwidth"));
  m.gripper = gripper_from_json(j.at("gripper"));
  const auto& links = j.at("links");
  if (!links.is_array() || links.size() != 2) throw FormatError("contact model needs exactly two links");
  for (int i = 0; i < 2; ++i) {
    for (const auto& k : links[i]) m.links[i].push_back(kernel_from(k, m.bandwidth));
  }
  return m;
}

Json to_json(const std::vector<CandidateGrasp>& grasps) {
  Json list = Json::array();
  for (const auto& g : grasps) list.push_back(grasp_json(g));
  return envelope(format::kGrasps, {{"grasps", list}});
}

std::vector<CandidateGrasp> grasps_from_json(const Json& j) {
  check_envelope(j, format::kGrasps);
  std::vector<CandidateGrasp> out;
  for (const auto& g : j.at("grasps")) out.push_back(grasp_from(g));
  return out;
}

Json to_json(const TrajectoryPlan& plan) {
  Json wps = Json::array();
  for (int tau = 0; tau <= plan.horizon(); ++tau) {
    wps.push_back({{"tau", tau},
                   {"pose", to_json(plan.waypoints[tau].pose)},
                   {"aperture", plan.waypoints[tau].aperture},
                   {"control", vec(plan.controls[tau])}});
  }
  return envelope(format::kPlan, {{"grasp", grasp_json(plan.grasp)}, {"dt", plan.dt}, {"waypoints", wps}});
}

TrajectoryPlan plan_from_json(const Json& j) {
  check_envelope(j, format::kPlan);
  TrajectoryPlan plan;
  plan.grasp = grasp_from(j.at("grasp"));
  plan.dt = field<double>(j, "dt");
  const auto& wps = j.at("waypoints");
  for (std::size_t i = 0; i < wps.size(); ++i) {
    if (field<int>(wps[i], "tau") != static_cast<int>(i)) throw FormatError("plan waypoints must be ordered by tau");
    plan.waypoints.push_back({pose_from_json(wps[i].at("pose")), field<double>(wps[i], "aperture")});
    plan.controls.push_back(vec_from(wps[i].at("control")));
  }
  return plan;
}

Json to_json(const GainSchedule& g) {
  Json steps = Json::array();
  for (int tau = 0; tau <= g.horizon(); ++tau)
    steps.push_back({{"tau", tau}, {"P", matrix_json(g.P[tau])}, {"K", matrix_json(g.K[tau])}});
  return envelope(format::kGains, {{"steps", steps}});
}

GainSchedule gains_from_json(const Json& j) {
  check_envelope(j, format::kGains);
  GainSchedule g;
  for (const auto& s : j.at("steps")) {
    g.P.push_back(matrix_from<3, 3>(s.at("P")));
    g.K.push_back(matrix_from<2, 3>(s.at("K")));
  }
  return g;
}

Json to_json(const ExperimentConfig& c) {
  Json modes = Json::array();
  for (auto m : c.modes) modes.push_back(to_string(m));
  const auto& sp = c.scene;
  return envelope(
      format::kConfig,
      {{"n_trials", c.n_trials},
       {"seed", c.seed},
       {"modes", modes},
       {"scene",
        {{"width", sp.width},
         {"ground_y", sp.ground_y},
         {"min_objects", sp.min_objects},
         {"max_objects", sp.max_objects},
         {"min_object_width", sp.min_object_width},
         {"max_object_width", sp.max_object_width},
         {"min_object_height", sp.min_object_height},
         {"max_object_height", sp.max_object_height},
         {"min_gap", sp.min_gap},
         {"edge_margin", sp.edge_margin},
         {"stack_probability", sp.stack_probability},
         {"resolution", sp.resolution},
         {"max_attempts", sp.max_attempts}}},
       {"features", {{"neighbours", c.features.neighbours}, {"max_curvature", c.features.max_curvature}}},
       {"gripper", to_json(c.gripper)},
       {"learning",
        {{"bandwidth", bandwidth_json(c.learning.bandwidth)},
         {"cutoff_factor", c.learning.cutoff_factor},
         {"weight_at_cutoff", c.learning.weight_at_cutoff}}},
       {"query", {{"max_kernels", c.query.max_kernels}, {"weight_floor", c.query.weight_floor}}},
       {"sampling",
        {{"samples", c.grasp_samples},
         {"aperture_step", c.sampling.aperture_step},
         {"top_k", c.sampling.top_k},
         {"cluster_position", c.sampling.cluster_position},
         {"cluster_angle", c.sampling.cluster_angle},
         {"cluster_aperture", c.sampling.cluster_aperture},
         {"refine_count", c.sampling.refine_count}}},
       {"planner",
        {{"step_length", c.planner.step_length},
         {"pregrasp_margin", c.planner.pregrasp_margin},
         {"close_distance", c.planner.close_distance},
         {"tilt_step", c.planner.tilt_step}}},
       {"controller",
        {{"kappa", c.controller.kappa},
         {"r_floor", c.controller.r_floor},
         {"hysteresis_margin", c.controller.hysteresis_margin},
         {"hysteresis_ticks", c.controller.hysteresis_ticks}}},
       {"sim",
        {{"dt", c.sim.dt},
         {"speed_limit", c.sim.speed_limit},
         {"aperture_rate", c.sim.aperture_rate},
         {"completion_tolerance", c.sim.completion_tolerance},
         {"max_ticks", c.sim.max_ticks}}},
       {"operator",
        {{"kind", to_string(c.op.kind)},
         {"noise_fraction", c.op.noise_fraction},
         {"gain", c.op.gain},
         {"reaction_delay", c.op.reaction_delay},
         {"distract_ticks", c.op.distract_ticks},
         {"close_distance", c.op.close_distance}}},
       {"start", {{"height", c.start_height}, {"aperture", c.start_aperture}}},
       {"workers", c.workers},
       {"max_infeasible_rate", c.max_infeasible_rate}});
}

ExperimentConfig config_from_json(const Json& j) {
  check_envelope(j, format::kConfig);
  only_keys(j,
            {"format", "version", "n_trials", "seed", "modes", "scene", "features", "gripper", "learning", "query",
             "sampling", "planner", "controller", "sim", "operator", "start", "workers", "max_infeasible_rate"},
            "config");
  ExperimentConfig c;
  optional_field(j, "n_trials", c.n_trials);
  optional_field(j, "seed", c.seed);
  optional_field(j, "workers", c.workers);
  optional_field(j, "max_infeasible_rate", c.max_infeasible_rate);
  if (j.contains("modes")) {
    c.modes.clear();
    for (const auto& m : j["modes"]) c.modes.push_back(mode_from_string(m.get<std::string>()));
  }
  if (j.contains("scene")) {
    const auto& s = j["scene"];
    only_keys(s,
              {"width", "ground_y", "min_objects", "max_objects", "min_object_width", "max_object_width",
               "min_object_height", "max_object_height", "min_gap", "edge_margin", "stack_probability", "resolution",
               "max_attempts"},
              "scene");
    auto& sp = c.scene;
    optional_field(s, "width", sp.width);
    optional_field(s, "ground_y", sp.ground_y);
    optional_field(s, "min_objects", sp.min_objects);
    optional_field(s, "max_objects", sp.max_objects);
    optional_field(s, "min_object_width", sp.min_object_width);
    optional_field(s, "max_object_width", sp.max_object_width);
    optional_field(s, "min_object_height", sp.min_object_height);
    optional_field(s, "max_object_height", sp.max_object_height);
    optional_field(s, "min_gap", sp.min_gap);
    optional_field(s, "edge_margin", sp.edge_margin);
    optional_field(s, "stack_probability", sp.stack_probability);
    optional_field(s, "resolution", sp.resolution);
    optional_field(s, "max_attempts", sp.max_attempts);
  }
  if (j.contains("features")) {
    only_keys(j["features"], {"neighbours", "max_curvature"}, "features");
    optional_field(j["features"], "neighbours", c.features.neighbours);
    optional_field(j["features"], "max_curvature", c.features.max_curvature);
  }
  if (j.contains("gripper")) c.gripper = gripper_from_json(j["gripper"]);
  if (j.contains("learning")) {
    const auto& l = j["learning"];
    only_keys(l, {"bandwidth", "cutoff_factor", "weight_at_cutoff"}, "learning");
    if (l.contains("bandwidth")) c.learning.bandwidth = bandwidth_from(l["bandwidth"]);
    optional_field(l, "cutoff_factor", c.learning.cutoff_factor);
    optional_field(l, "weight_at_cutoff", c.learning.weight_at_cutoff);
  }
  if (j.contains("query")) {
    only_keys(j["query"], {"max_kernels", "weight_floor"}, "query");
    optional_field(j["query"], "max_kernels", c.query.max_kernels);
    optional_field(j["query"], "weight_floor", c.query.weight_floor);
  }
  if (j.contains("sampling")) {
    const auto& s = j["sampling"];
    only_keys(s,
              {"samples", "aperture_step", "top_k", "cluster_position", "cluster_angle", "cluster_aperture",
               "refine_count"},
              "sampling");
    optional_field(s, "samples", c.grasp_samples);
    optional_field(s, "aperture_step", c.sampling.aperture_step);
    optional_field(s, "top_k", c.sampling.top_k);
    optional_field(s, "cluster_position", c.sampling.cluster_position);
    optional_field(s, "cluster_angle", c.sampling.cluster_angle);
    optional_field(s, "cluster_aperture", c.sampling.cluster_aperture);
    optional_field(s, "refine_count", c.sampling.refine_count);
  }
  if (j.contains("planner")) {
    const auto& p = j["planner"];
    only_keys(p, {"step_length", "pregrasp_margin", "close_distance", "tilt_step"}, "planner");
    optional_field(p, "step_length", c.planner.step_length);
    optional_field(p, "pregrasp_margin", c.planner.pregrasp_margin);
    optional_field(p, "close_distance", c.planner.close_distance);
    optional_field(p, "tilt_step", c.planner.tilt_step);
  }
  if (j.contains("controller")) {
    const auto& p = j["controller"];
    only_keys(p, {"kappa", "r_floor", "hysteresis_margin", "hysteresis_ticks"}, "controller");
    optional_field(p, "kappa", c.controller.kappa);
    optional_field(p, "r_floor", c.controller.r_floor);
    optional_field(p, "hysteresis_margin", c.controller.hysteresis_margin);
    optional_field(p, "hysteresis_ticks", c.controller.hysteresis_ticks);
  }
  if (j.contains("sim")) {
    const auto& s = j["sim"];
    only_keys(s, {"dt", "speed_limit", "aperture_rate", "completion_tolerance", "max_ticks"}, "sim");
    optional_field(s, "dt", c.sim.dt);
    optional_field(s, "speed_limit", c.sim.speed_limit);
    optional_field(s, "aperture_rate", c.sim.aperture_rate);
    optional_field(s, "completion_tolerance", c.sim.completion_tolerance);
    optional_field(s, "max_ticks", c.sim.max_ticks);
  }
  if (j.contains("operator")) {
    const auto& o = j["operator"];
    only_keys(o, {"kind", "noise_fraction", "gain", "reaction_delay", "distract_ticks", "close_distance"}, "operator");
    if (o.contains("kind")) c.op.kind = operator_kind_from_string(field<std::string>(o, "kind"));
    optional_field(o, "noise_fraction", c.op.noise_fraction);
    optional_field(o, "gain", c.op.gain);
    optional_field(o, "reaction_delay", c.op.reaction_delay);
    optional_field(o, "distract_ticks", c.op.distract_ticks);
    optional_field(o, "close_distance", c.op.close_distance);
  }
  if (j.contains("start")) {
    only_keys(j["start"], {"height", "aperture"}, "start");
    optional_field(j["start"], "height", c.start_height);
    optional_field(j["start"], "aperture", c.start_aperture);
  }
  c.planner.dt = c.sim.dt;
  c.controller.speed_limit = c.sim.speed_limit;
  if (c.n_trials < 0) throw FormatError("n_trials must be non-negative");
  if (c.modes.empty()) throw FormatError("at least one mode is required");
  if (!(c.sim.dt > 0.0)) throw FormatError("sim.dt must be positive");
  return c;
}

Json to_json(const TickLog& t) {
  return {{"tick", t.tick},
          {"input", {{"velocity", vec(t.input.velocity)}, {"aperture_dir", t.input.aperture_dir}}},
          {"command", vec(t.command)},
          {"selected", t.selected},
          {"costs", t.costs},
          {"lqr_command", vec(t.lqr_command)},
          {"alpha", t.alpha},
          {"waypoint", t.waypoint},
          {"state", state_json(t.state)}};
}

TickLog tick_from_json(const Json& j) {
  TickLog t;
  t.tick = field<int>(j, "tick");
  t.input.velocity = vec_from(j.at("input").at("velocity"));
  t.input.aperture_dir = field<int>(j.at("input"), "aperture_dir");
  t.command = vec_from(j.at("command"));
  t.selected = field<int>(j, "selected");
  t.costs = field<std::vector<double>>(j, "costs");
  t.lqr_command = vec_from(j.at("lqr_command"));
  t.alpha = field<double>(j, "alpha");
  t.waypoint = field<int>(j, "waypoint");
  t.state = state_from(j.at("state"));
  return t;
}

void write_trial_record(std::ostream& out, const TrialRecord& r) {
  out << envelope(format::kTrial, {{"trial", r.trial},
                                   {"scene_seed", r.scene_seed},
                                   {"target_object", r.target_object},
                                   {"target_grasp", r.target_grasp},
                                   {"mode", to_string(r.mode)},
                                   {"config_hash", r.config_hash}})
             .dump()
      << '\n';
  for (const auto& t : r.ticks) out << to_json(t).dump() << '\n';
  out << Json{{"outcome", outcome_json(r.outcome)}, {"aborted", r.aborted}}.dump() << '\n';
}

TrialRecord read_trial_record(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty trial record");
  TrialRecord r;
  try {
    const Json head = Json::parse(line);
    check_envelope(head, format::kTrial);
    r.trial = field<int>(head, "trial");
    r.scene_seed = field<std::uint64_t>(head, "scene_seed");
    r.target_object = field<int>(head, "target_object");
    r.target_grasp = field<int>(head, "target_grasp");
    r.mode = mode_from_string(field<std::string>(head, "mode"));
    r.config_hash = field<std::string>(head, "config_hash");
    bool summary = false;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const Json j = Json::parse(line);
      if (j.contains("outcome")) {
        r.outcome = outcome_from(j.at("outcome"));
        r.aborted = field<bool>(j, "aborted");
        summary = true;
        break;
      }
      r.ticks.push_back(tick_from_json(j));
    }
    if (!summary) throw FormatError("trial record has no summary line");
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed trial record: ") + e.what());
  }
  return r;
}

Json to_json(const ModeSummary& m) {
  return {{"mode", to_string(m.mode)},
          {"n", m.n},
          {"n_success", m.n_success},
          {"penetrations", m.penetrations},
          {"position_error", {{"mean", m.error_mean}, {"std", m.error_std}, {"values", m.errors}}},
          {"execution_time", {{"mean", m.time_mean}, {"std", m.time_std}, {"values", m.times}}},
          {"trials", m.trials}};
}

Json to_json(const ExperimentSummary& s) {
  Json modes = Json::array();
  for (const auto& m : s.modes) modes.push_back(to_json(m));
  return envelope(format::kSummary, {{"config_hash", s.config_hash},
                                     {"n_trials", s.n_trials},
                                     {"infeasible", s.infeasible},
                                     {"infeasible_reasons", s.infeasible_reasons},
                                     {"infeasible_rate", s.infeasible_rate()},
                                     {"modes", modes}});
}

Json to_json(const Distribution& d) {
  return envelope(format::kPlot, {{"mode", d.mode},
                                  {"metric", d.metric},
                                  {"values", d.values},
                                  {"mean", d.mean},
                                  {"std", d.std},
                                  {"q1", d.q1},
                                  {"median", d.median},
                                  {"q3", d.q3},
                                  {"outliers", d.outliers}});
}

Distribution distribution_from_json(const Json& j) {
  check_envelope(j, format::kPlot);
  Distribution d;
  d.mode = field<std::string>(j, "mode");
  d.metric = field<std::string>(j, "metric");
  d.values = field<std::vector<double>>(j, "values");
  d.mean = field<double>(j, "mean");
  d.std = field<double>(j, "std");
  d.q1 = field<double>(j, "q1");
  d.median = field<double>(j, "median");
  d.q3 = field<double>(j, "q3");
  d.outliers = field<std::vector<double>>(j, "outliers");
  return d;
}

std::vector<std::filesystem::path> emit_plot_data(const ExperimentSummary& summary,
                                                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& m : summary.modes) {
    for (const auto& [metric, values] :
         {std::pair{"position_error", &m.errors}, std::pair{"execution_time", &m.times}}) {
      const auto path = dir / (std::string("plot_") + to_string(m.mode) + "_" + metric + ".json");
      save_json(path, to_json(describe(to_string(m.mode), metric, *values)));
      written.push_back(path);
    }
  }
  return written;
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace sgw
