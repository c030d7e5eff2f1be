// Command line front end: learning, grasp sampling, batch experiments, replay and the session service.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sgw/bridge.hpp"
#include "sgw/error.hpp"
#include "sgw/io.hpp"

namespace fs = std::filesystem;
using namespace sgw;

namespace {

constexpr int kExitInfeasible = 3;
constexpr int kExitMismatch = 4;

ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return config_from_json(load_json(path));
}

ContactModel load_or_learn(const std::string& model_path, const ExperimentConfig& cfg) {
  if (!model_path.empty()) return contact_model_from_json(load_json(model_path));
  return learn_from_demonstration(default_demonstration(), cfg);
}

int demo_learn(const std::string& config_path, const fs::path& out) {
  const auto cfg = load_config(config_path);
  const auto demo = default_demonstration();
  const auto model = learn_from_demonstration(demo, cfg);
  fs::create_directories(out);
  save_json(out / "demo_scene.json", to_json(demo.scene));
  save_json(out / "contact_model.json", to_json(model));
  std::cout << "learned " << model.links[0].size() << " + " << model.links[1].size() << " kernels -> "
            << (out / "contact_model.json").string() << "\n";
  return 0;
}

int sample(const std::string& config_path, const std::string& model_path, const std::string& scene_path,
           std::uint64_t seed, int samples, const fs::path& out) {
  auto cfg = load_config(config_path);
  if (samples > 0) cfg.grasp_samples = samples;
  const auto model = load_or_learn(model_path, cfg);
  const Landscape scene = scene_path.empty() ? generate_scene(seed, cfg.scene) : scene_from_json(load_json(scene_path));
  const auto density = build_query_density(model, extract_features(scene, cfg.features), cfg.query);
  const auto grasps = sample_grasps(density, cfg.gripper, scene, cfg.grasp_samples, seed, cfg.sampling);
  fs::create_directories(out);
  save_json(out / "scene.json", to_json(scene));
  save_json(out / "grasps.json", to_json(grasps));
  const Waypoint start{Pose2(scene.width / 2, scene.ground_y + cfg.start_height, kVerticalApproach),
                       cfg.start_aperture};
  const auto candidates = plan_candidates(cfg, scene, grasps, start);
  for (const auto& c : candidates) {
    save_json(out / ("plan_" + std::to_string(c.id) + ".json"), to_json(c.plan));
    save_json(out / ("gains_" + std::to_string(c.id) + ".json"), to_json(c.gains));
  }
  std::cout << grasps.size() << " grasps, " << candidates.size() << " plannable candidates -> " << out.string()
            << "\n";
  for (const auto& g : grasps) {
    std::printf("  object %d  x %.2f  y %.2f  theta %.3f  aperture %.2f  score %.4g\n", g.object_id, g.pose.x(),
                g.pose.y(), g.pose.theta(), g.aperture, g.score);
  }
  return 0;
}

int run(const std::string& config_path, const std::string& model_path, std::optional<std::uint64_t> seed,
        std::optional<int> trials, const std::string& op, const fs::path& out, bool write_records) {
  auto cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (trials) cfg.n_trials = *trials;
  if (!op.empty()) cfg.op.kind = operator_kind_from_string(op);
  const auto model = load_or_learn(model_path, cfg);
  const auto summary = run_experiment(cfg, model);

  fs::create_directories(out);
  save_json(out / "config.json", to_json(cfg));
  save_json(out / "summary.json", to_json(summary));
  emit_plot_data(summary, out);
  if (write_records) {
    fs::create_directories(out / "trials");
    for (const auto& r : summary.records) {
      std::ofstream f(out / "trials" / ("trial_" + std::to_string(r.trial) + "_" + to_string(r.mode) + ".jsonl"));
      write_trial_record(f, r);
    }
  }

  std::printf("config %s  trials %d  infeasible %zu (%.1f%%)\n", summary.config_hash.c_str(), summary.n_trials,
              summary.infeasible.size(), 100.0 * summary.infeasible_rate());
  for (const auto& m : summary.modes) {
    std::printf("  %-9s n %3d  success %3d  error %.3f +- %.3f mm  time %.3f +- %.3f s  penetrations %d\n",
                to_string(m.mode), m.n, m.n_success, m.error_mean, m.error_std, m.time_mean, m.time_std,
                m.penetrations);
  }
  if (summary.infeasible_rate() > cfg.max_infeasible_rate) {
    std::fprintf(stderr, "infeasible-trial rate %.3f exceeds the threshold %.3f\n", summary.infeasible_rate(),
                 cfg.max_infeasible_rate);
    return kExitInfeasible;
  }
  return 0;
}

int replay(const std::string& config_path, const std::string& model_path, const std::string& record_path) {
  const auto cfg = load_config(config_path);
  std::ifstream in(record_path);
  if (!in) throw FormatError("cannot open " + record_path);
  const auto record = read_trial_record(in);
  if (record.config_hash != config_hash(cfg)) {
    std::fprintf(stderr, "record was produced by config %s but this config hashes to %s\n",
                 record.config_hash.c_str(), config_hash(cfg).c_str());
    return kExitMismatch;
  }
  const auto again = replay_record(cfg, load_or_learn(model_path, cfg), record);
  if (!(again == record)) {
    std::size_t first = 0;
    while (first < std::min(again.ticks.size(), record.ticks.size()) && again.ticks[first] == record.ticks[first])
      ++first;
    std::fprintf(stderr, "replay diverged at tick index %zu\n", first);
    return kExitMismatch;
  }
  std::printf("replay of trial %d (%s) matches: %zu ticks, error %.3f mm, time %.3f s\n", record.trial,
              to_string(record.mode), record.ticks.size(), record.outcome.position_error,
              record.outcome.execution_time);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shared-control grasping workbench"};
  app.require_subcommand(1);

  std::string config_path, model_path;
  std::string out = "out";

  auto* learn_cmd = app.add_subcommand("demo-learn", "Learn the contact model from the built-in demonstration");
  learn_cmd->add_option("-c,--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  learn_cmd->add_option("-o,--out", out, "Output directory");

  std::string scene_path;
  std::uint64_t sample_seed = 1;
  int samples = 0;
  auto* sample_cmd = app.add_subcommand("sample-grasps", "Sample candidate grasps and plans on a scene");
  sample_cmd->add_option("-c,--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  sample_cmd->add_option("-m,--model", model_path, "Contact model (JSON); learned from the demo if omitted")
      ->check(CLI::ExistingFile);
  sample_cmd->add_option("--scene", scene_path, "Scene file; generated from --seed if omitted")
      ->check(CLI::ExistingFile);
  sample_cmd->add_option("-s,--seed", sample_seed, "Scene and sampling seed");
  sample_cmd->add_option("-n,--samples", samples, "Number of drawn samples");
  sample_cmd->add_option("-o,--out", out, "Output directory");

  std::optional<std::uint64_t> run_seed;
  std::optional<int> trials;
  std::string op;
  bool no_records = false;
  auto* run_cmd = app.add_subcommand("run", "Run a batch experiment with a synthetic operator");
  run_cmd->add_option("-c,--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  run_cmd->add_option("-m,--model", model_path, "Contact model (JSON)")->check(CLI::ExistingFile);
  run_cmd->add_option("-s,--seed", run_seed, "Override the config seed");
  run_cmd->add_option("-n,--trials", trials, "Override the number of trials");
  run_cmd->add_option("--operator", op, "oracle | noisy-proportional | distracted-then-corrects");
  run_cmd->add_option("-o,--out", out, "Output directory");
  run_cmd->add_flag("--no-records", no_records, "Skip per-trial record files");

  std::string record_path;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a trial record and check it reproduces bit-exactly");
  replay_cmd->add_option("-c,--config", config_path, "Config the record was produced with")->check(CLI::ExistingFile);
  replay_cmd->add_option("-m,--model", model_path, "Contact model (JSON)")->check(CLI::ExistingFile);
  replay_cmd->add_option("record", record_path, "Trial record (.jsonl)")->required()->check(CLI::ExistingFile);

  int port = 8080;
  std::string static_dir;
  std::uint64_t serve_seed = 1;
  double idle_timeout = 60.0;
  auto* serve_cmd = app.add_subcommand("serve", "Serve interactive sessions over HTTP");
  serve_cmd->add_option("-c,--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  serve_cmd->add_option("-m,--model", model_path, "Contact model (JSON)")->check(CLI::ExistingFile);
  serve_cmd->add_option("-p,--port", port, "TCP port")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("-s,--seed", serve_seed, "Seed of the first scene");
  serve_cmd->add_option("--static", static_dir, "Directory served at / (operator console assets)");
  serve_cmd->add_option("--idle-timeout", idle_timeout, "Seconds without client contact before a session is aborted");
  serve_cmd->add_option("-o,--out", out, "Directory for aborted and finished trial logs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*learn_cmd) return demo_learn(config_path, out);
    if (*sample_cmd) return sample(config_path, model_path, scene_path, sample_seed, samples, out);
    if (*run_cmd) return run(config_path, model_path, run_seed, trials, op, out, !no_records);
    if (*replay_cmd) return replay(config_path, model_path, record_path);
    if (*serve_cmd) {
      ServeOptions opts;
      opts.port = port;
      if (const char* bind = std::getenv("SGW_BIND_ADDRESS")) opts.host = bind;
      opts.static_dir = static_dir;
      opts.log_dir = out;
      opts.idle_timeout = idle_timeout;
      const auto cfg = load_config(config_path);
      return serve(opts, cfg, load_or_learn(model_path, cfg), serve_seed);
    }
  } catch (const sgw::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
