#include "sgw/bridge.hpp"

#include <httplib.h>

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <utility>

#include "sgw/error.hpp"

namespace sgw {

namespace {

constexpr int kMaxSceneAttempts = 32;

Json vec(const Vec2& v) { return Json::array({v.x(), v.y()}); }

Json error_frame(std::optional<std::int64_t> seq, int tick, const std::string& message) {
  return {{"protocol", kProtocol},
          {"type", "error"},
          {"seq", seq ? Json(*seq) : Json(nullptr)},
          {"tick", tick},
          {"message", message}};
}

}  // namespace

Vec2 numpad_direction(const std::string& keys) {
  static const std::array<Vec2, 10> kDirs = {Vec2(0, 0),  Vec2(-1, -1), Vec2(0, -1), Vec2(1, -1), Vec2(-1, 0),
                                             Vec2(0, 0),  Vec2(1, 0),   Vec2(-1, 1),  Vec2(0, 1),  Vec2(1, 1)};
  std::array<bool, 10> held{};
  for (char c : keys)
    if (c >= '1' && c <= '9') held[c - '0'] = true;
  Vec2 d = Vec2::Zero();
  for (int k = 1; k <= 9; ++k)
    if (held[k]) d += kDirs[k];
  const double n = d.norm();
  return n > 1e-12 ? Vec2(d / n) : Vec2::Zero();
}

Vec2 numpad_velocity(const std::string& keys, double speed_limit) { return numpad_direction(keys) * speed_limit; }

BridgeSession::BridgeSession(ExperimentConfig cfg, ContactModel model, std::uint64_t seed, Mode mode)
    : cfg_(std::move(cfg)), model_(std::move(model)), mode_(mode) {
  cfg_.seed = seed;
  hash_ = config_hash(cfg_);
  load_scene(0);
}

void BridgeSession::load_scene(std::uint64_t scene_index) {
  retire(true);
  trial_.reset();
  session_.reset();
  infeasible_reason_.clear();
  for (int attempt = 0; attempt < kMaxSceneAttempts; ++attempt, ++scene_index) {
    std::string why;
    trial_ = prepare_trial(cfg_, model_, static_cast<int>(scene_index), &why);
    if (trial_) break;
    infeasible_reason_ = why;
  }
  scene_index_ = scene_index;
  restart();
}

void BridgeSession::retire(bool aborted) {
  if (reported_ || !session_ || session_->log().empty()) return;
  retired_.push_back(*record(aborted));
  reported_ = true;
}

std::vector<TrialRecord> BridgeSession::take_records() { return std::exchange(retired_, {}); }

void BridgeSession::abort() { retire(true); }

void BridgeSession::restart() {
  retire(true);
  reported_ = false;
  held_keys_.clear();
  aperture_dir_ = 0;
  if (trial_) session_.emplace(session_setup(cfg_, *trial_, mode_));
}

std::optional<Json> BridgeSession::handle(const std::string& text) {
  Json msg;
  try {
    msg = Json::parse(text);
  } catch (const Json::parse_error& e) {
    return error_frame(std::nullopt, frame_tick_, std::string("malformed JSON: ") + e.what());
  }
  if (!msg.is_object()) return error_frame(std::nullopt, frame_tick_, "message must be an object");

  std::optional<std::int64_t> seq;
  if (msg.contains("seq") && msg["seq"].is_number_integer()) seq = msg["seq"].get<std::int64_t>();
  auto fail = [&](const std::string& why) -> std::optional<Json> {
    if (seq && *seq > last_seq_) {
      last_seq_ = *seq;
      pending_acks_.push_back(*seq);
    }
    return error_frame(seq, frame_tick_, why);
  };

  if (!msg.contains("protocol") || msg["protocol"] != kProtocol)
    return fail(std::string("protocol must be \"") + kProtocol + "\"");
  if (!seq) return fail("seq must be an integer");
  if (*seq <= last_seq_) return error_frame(seq, frame_tick_, "seq " + std::to_string(*seq) + " is not increasing");
  if (!msg.contains("type") || !msg["type"].is_string()) return fail("type must be a string");

  const std::string type = msg["type"];
  if (type == "keys") {
    if (!msg.contains("keys") || !msg["keys"].is_string()) return fail("keys must be a string");
    held_keys_ = msg["keys"].get<std::string>();
  } else if (type == "aperture") {
    if (!msg.contains("dir") || !msg["dir"].is_number_integer()) return fail("dir must be -1, 0 or 1");
    const int dir = msg["dir"];
    if (dir < -1 || dir > 1) return fail("dir must be -1, 0 or 1");
    aperture_dir_ = dir;
  } else if (type == "mode") {
    if (!msg.contains("mode") || !msg["mode"].is_string()) return fail("mode must be \"manual\" or \"assisted\"");
    try {
      mode_ = mode_from_string(msg["mode"]);
    } catch (const FormatError& e) {
      return fail(e.what());
    }
    restart();
  } else if (type == "restart") {
    restart();
  } else if (type == "new_scene") {
    load_scene(scene_index_ + 1);
  } else {
    return fail("unknown message type '" + type + "'");
  }
  last_seq_ = *seq;
  pending_acks_.push_back(*seq);
  return std::nullopt;
}

Json BridgeSession::tick() {
  ++frame_tick_;
  if (session_ && !session_->done()) {
    OperatorInput in;
    in.velocity = numpad_velocity(held_keys_, cfg_.sim.speed_limit);
    in.aperture_dir = aperture_dir_;
    session_->advance(in);
    if (session_->done()) retire(false);
  }
  Json f = frame();
  pending_acks_.clear();
  return f;
}

Json BridgeSession::frame() const {
  Json f{{"protocol", kProtocol},
         {"type", "frame"},
         {"tick", frame_tick_},
         {"acks", pending_acks_},
         {"mode", to_string(mode_)},
         {"held", {{"keys", held_keys_}, {"aperture", aperture_dir_}}}};
  if (!trial_ || !session_) {
    f["trial"] = nullptr;
    f["message"] = "no feasible scene: " + infeasible_reason_;
    return f;
  }

  const auto& s = *session_;
  const auto& setup = s.setup();
  const auto& st = s.state();
  const auto& arb = s.last_arbitration();
  const TickLog* last = s.log().empty() ? nullptr : &s.log().back();
  const Outcome o = s.outcome();

  f["trial"] = {{"index", trial_->trial},
                {"scene_seed", trial_->scene_seed},
                {"tick", st.tick},
                {"target_object", trial_->target_object},
                {"target_grasp", trial_->candidates[trial_->target].id},
                {"done", s.done()},
                {"complete", s.complete()}};

  f["scene"] = to_json(setup.scene);

  const auto links = link_poses(setup.gripper, st.pose, st.aperture);
  f["gripper"] = {{"pose", to_json(st.pose)},
                  {"aperture", st.aperture},
                  {"finger_radius", setup.gripper.finger_radius},
                  {"links", Json::array({vec(links[0].p()), vec(links[1].p())})}};

  Json cands = Json::array();
  for (std::size_t i = 0; i < setup.candidates.size(); ++i) {
    const auto& g = setup.candidates[i].plan.grasp;
    Json jc{{"id", setup.candidates[i].id},
            {"object_id", g.object_id},
            {"pose", to_json(g.pose)},
            {"aperture", g.aperture},
            {"score", g.score}};
    jc["cost"] = (arb && i < arb->costs.size()) ? Json(arb->costs[i]) : Json(nullptr);
    cands.push_back(jc);
  }
  f["candidates"] = cands;

  if (arb) {
    const auto& plan = setup.candidates[arb->selected].plan;
    Json ghost = Json::array();
    for (int tau = std::max(arb->waypoint, 0); tau >= 0; --tau) ghost.push_back(vec(plan.at(tau).pose.p()));
    f["selected"] = setup.candidates[arb->selected].id;
    f["ghost"] = ghost;
    f["alpha"] = arb->alpha;
  } else {
    f["selected"] = nullptr;
    f["ghost"] = Json::array();
    f["alpha"] = nullptr;
  }
  f["input"] = last ? vec(last->input.velocity) : vec(Vec2::Zero());
  f["command"] = last ? vec(last->command) : vec(Vec2::Zero());
  f["metrics"] = {{"elapsed", st.tick * st.dt},
                  {"execution_time", o.execution_time},
                  {"position_error", o.position_error},
                  {"reference_grasp", setup.candidates[s.reference_candidate()].id}};
  return f;
}

std::optional<TrialRecord> BridgeSession::record(bool aborted) const {
  if (!trial_ || !session_) return std::nullopt;
  auto r = make_record(*trial_, session_->setup().mode, hash_, *session_);
  r.aborted = aborted && !session_->done();
  return r;
}

namespace {

struct LiveSession {
  std::mutex mu;
  BridgeSession core;
  Json latest;
  std::chrono::steady_clock::time_point last_contact = std::chrono::steady_clock::now();
  std::atomic<bool> stop{false};
  std::thread ticker;
  int logged = 0;

  LiveSession(const ExperimentConfig& cfg, const ContactModel& model, std::uint64_t seed, Mode mode)
      : core(cfg, model, seed, mode), latest(core.frame()) {}
};

class Server {
 public:
  Server(ServeOptions opts, ExperimentConfig cfg, ContactModel model, std::uint64_t seed)
      : opts_(std::move(opts)), cfg_(std::move(cfg)), model_(std::move(model)), seed_(seed) {}

  ~Server() {
    std::map<std::string, std::shared_ptr<LiveSession>> all;
    {
      std::lock_guard lk(mu_);
      all.swap(sessions_);
    }
    for (auto& [id, s] : all) close(id, *s);
  }

  int run() {
    std::filesystem::create_directories(opts_.log_dir);
    if (!opts_.static_dir.empty() && !http_.set_mount_point("/", opts_.static_dir)) {
      std::cerr << "static directory " << opts_.static_dir << " does not exist\n";
      return 2;
    }
    http_.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, {{"protocol", kProtocol}, {"status", "ok"}});
    });
    http_.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) { create(req, res); });
    http_.Post(R"(/api/sessions/([0-9a-z]+)/messages)",
               [this](const httplib::Request& req, httplib::Response& res) { message(req, res); });
    http_.Get(R"(/api/sessions/([0-9a-z]+)/frame)",
              [this](const httplib::Request& req, httplib::Response& res) { frame(req, res); });
    http_.Delete(R"(/api/sessions/([0-9a-z]+))",
                 [this](const httplib::Request& req, httplib::Response& res) { remove(req, res); });

    reaper_ = std::thread([this] { reap(); });
    std::cout << "serving " << kProtocol << " on http://" << opts_.host << ":" << opts_.port << std::endl;
    const bool ok = http_.listen(opts_.host, opts_.port);
    reaping_ = false;
    reaper_.join();
    if (!ok) {
      std::cerr << "cannot listen on " << opts_.host << ":" << opts_.port << "\n";
      return 2;
    }
    return 0;
  }

 private:
  static void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  std::shared_ptr<LiveSession> find(const std::string& id) {
    std::lock_guard lk(mu_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  void create(const httplib::Request& req, httplib::Response& res) {
    std::uint64_t seed = seed_;
    Mode mode = Mode::kAssisted;
    if (!req.body.empty()) {
      try {
        const Json j = Json::parse(req.body);
        if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
        if (j.contains("mode")) mode = mode_from_string(j["mode"].get<std::string>());
      } catch (const std::exception& e) {
        reply(res, 400, error_frame(std::nullopt, 0, std::string("bad session request: ") + e.what()));
        return;
      }
    }
    auto live = std::make_shared<LiveSession>(cfg_, model_, seed, mode);
    std::string id;
    {
      std::lock_guard lk(mu_);
      id = std::to_string(next_id_++);
      sessions_[id] = live;
    }
    auto session_cfg = cfg_;
    session_cfg.seed = seed;
    save_json(opts_.log_dir / ("session_" + id + "_config.json"), to_json(session_cfg));
    live->ticker = std::thread([this, id, live] { tick_loop(id, *live); });
    std::lock_guard lk(live->mu);
    reply(res, 200, {{"protocol", kProtocol}, {"session", id}, {"frame", live->latest}});
  }

  void message(const httplib::Request& req, httplib::Response& res) {
    const auto live = find(req.matches[1]);
    if (!live) return reply(res, 404, error_frame(std::nullopt, 0, "unknown session"));
    std::lock_guard lk(live->mu);
    live->last_contact = std::chrono::steady_clock::now();
    const int before = live->core.tick_count();
    auto err = live->core.handle(req.body);
    flush(id_of(req), *live);
    if (err) return reply(res, 400, *err);
    reply(res, 200, {{"protocol", kProtocol}, {"type", "accepted"}, {"tick", before}});
  }

  void frame(const httplib::Request& req, httplib::Response& res) {
    const auto live = find(req.matches[1]);
    if (!live) return reply(res, 404, error_frame(std::nullopt, 0, "unknown session"));
    std::lock_guard lk(live->mu);
    live->last_contact = std::chrono::steady_clock::now();
    reply(res, 200, live->latest);
  }

  void remove(const httplib::Request& req, httplib::Response& res) {
    std::shared_ptr<LiveSession> live;
    const std::string id = req.matches[1];
    {
      std::lock_guard lk(mu_);
      const auto it = sessions_.find(id);
      if (it != sessions_.end()) {
        live = it->second;
        sessions_.erase(it);
      }
    }
    if (!live) return reply(res, 404, error_frame(std::nullopt, 0, "unknown session"));
    close(id, *live);
    reply(res, 200, {{"protocol", kProtocol}, {"type", "closed"}, {"session", id}});
  }

  void tick_loop(const std::string& id, LiveSession& live) {
    const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(cfg_.sim.dt));
    auto next = std::chrono::steady_clock::now();
    while (!live.stop) {
      next += period;
      std::this_thread::sleep_until(next);
      std::lock_guard lk(live.mu);
      live.latest = live.core.tick();
      flush(id, live);
    }
  }

  static std::string id_of(const httplib::Request& req) { return req.matches[1]; }

  /// Caller holds live.mu.
  void flush(const std::string& id, LiveSession& live) {
    for (const auto& r : live.core.take_records()) {
      const auto path = opts_.log_dir / ("session_" + id + "_" + std::to_string(++live.logged) + "_trial_" +
                                         std::to_string(r.trial) + "_" + to_string(r.mode) + ".jsonl");
      std::ofstream out(path);
      write_trial_record(out, r);
    }
  }

  void close(const std::string& id, LiveSession& live) {
    live.stop = true;
    if (live.ticker.joinable()) live.ticker.join();
    std::lock_guard lk(live.mu);
    live.core.abort();
    flush(id, live);
  }

  void reap() {
    while (reaping_) {
      std::this_thread::sleep_for(std::chrono::milliseconds(200));
      const auto now = std::chrono::steady_clock::now();
      std::vector<std::pair<std::string, std::shared_ptr<LiveSession>>> idle;
      {
        std::lock_guard lk(mu_);
        for (auto it = sessions_.begin(); it != sessions_.end();) {
          bool stale;
          {
            std::lock_guard slk(it->second->mu);
            stale = std::chrono::duration<double>(now - it->second->last_contact).count() > opts_.idle_timeout;
          }
          if (stale) {
            idle.emplace_back(it->first, it->second);
            it = sessions_.erase(it);
          } else {
            ++it;
          }
        }
      }
      for (auto& [id, s] : idle) {
        std::cerr << "session " << id << " idle, aborting\n";
        close(id, *s);
      }
    }
  }

  ServeOptions opts_;
  ExperimentConfig cfg_;
  ContactModel model_;
  std::uint64_t seed_;
  httplib::Server http_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<LiveSession>> sessions_;
  std::uint64_t next_id_ = 1;
  std::thread reaper_;
  std::atomic<bool> reaping_{true};
};

}  // namespace

int serve(const ServeOptions& opts, const ExperimentConfig& cfg, const ContactModel& model, std::uint64_t seed) {
  Server server(opts, cfg, model, seed);
  return server.run();
}

}  // namespace sgw
