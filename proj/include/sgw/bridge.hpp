#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sgw/io.hpp"

namespace sgw {

inline constexpr const char* kProtocol = "sgw/1";

/// Unit direction of a held numpad key set: 8 up, 2 down, 4 left, 6 right,
/// 7/9/1/3 the diagonals. Keys outside 1-9 are ignored; opposing keys cancel.
Vec2 numpad_direction(const std::string& keys);

/// Operator velocity for a held key set: the direction scaled to the speed limit.
Vec2 numpad_velocity(const std::string& keys, double speed_limit);

/// One interactive session. Not thread-safe; the server serialises access.
/// Messages update a latest-wins mailbox, tick() consumes it and produces a frame.
class BridgeSession {
 public:
  BridgeSession(ExperimentConfig cfg, ContactModel model, std::uint64_t seed, Mode mode = Mode::kAssisted);

  /// Parses and applies one client message. Returns an error frame for malformed
  /// input; the session state is left untouched in that case.
  std::optional<Json> handle(const std::string& text);

  /// Advances one tick (when a trial is running) and returns the full frame.
  Json tick();

  /// Frame for the current state without advancing.
  Json frame() const;

  int tick_count() const { return frame_tick_; }
  bool trial_done() const { return !session_ || session_->done(); }
  Mode mode() const { return mode_; }

  /// Record of the trial in progress or last finished; nullopt when none was started.
  std::optional<TrialRecord> record(bool aborted) const;

  /// Records of trials that finished or were replaced since the last call. Each trial is reported once.
  std::vector<TrialRecord> take_records();

  /// Reports the running trial as aborted, if it has not been reported yet.
  void abort();

 private:
  void load_scene(std::uint64_t scene_index);
  void restart();
  void retire(bool aborted);

  ExperimentConfig cfg_;
  ContactModel model_;
  std::string hash_;
  Mode mode_;
  std::uint64_t scene_index_ = 0;
  std::optional<TrialSetup> trial_;
  std::optional<Session> session_;
  std::string infeasible_reason_;
  bool reported_ = false;
  std::vector<TrialRecord> retired_;

  std::string held_keys_;
  int aperture_dir_ = 0;
  std::vector<std::int64_t> pending_acks_;
  std::int64_t last_seq_ = -1;
  int frame_tick_ = 0;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  std::filesystem::path log_dir = "out";
  /// Seconds without any request for a session before it is aborted and logged.
  double idle_timeout = 60.0;
};

/// Blocks serving the HTTP API until the process is stopped. Returns a process exit code.
int serve(const ServeOptions& opts, const ExperimentConfig& cfg, const ContactModel& model, std::uint64_t seed);

}  // namespace sgw
