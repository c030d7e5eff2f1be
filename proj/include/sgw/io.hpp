#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "sgw/harness.hpp"

namespace sgw {

using Json = nlohmann::json;

/// Every file carries {"format": <name>, "version": kFormatVersion}.
inline constexpr int kFormatVersion = 1;

namespace format {
inline constexpr const char* kScene = "sgw.scene";
inline constexpr const char* kContactModel = "sgw.contact_model";
inline constexpr const char* kGrasps = "sgw.grasps";
inline constexpr const char* kPlan = "sgw.plan";
inline constexpr const char* kGains = "sgw.gains";
inline constexpr const char* kConfig = "sgw.config";
inline constexpr const char* kTrial = "sgw.trial";
inline constexpr const char* kSummary = "sgw.summary";
inline constexpr const char* kPlot = "sgw.plot";
}  // namespace format

Json envelope(const char* format, Json body = Json::object());
/// Throws FormatError when the format tag or version does not match.
void check_envelope(const Json& j, const char* format);

Json to_json(const Pose2& p);
Pose2 pose_from_json(const Json& j);

Json to_json(const Landscape& scene);
Landscape scene_from_json(const Json& j);

Json to_json(const GripperModel& g);
GripperModel gripper_from_json(const Json& j);

Json to_json(const ContactModel& m);
ContactModel contact_model_from_json(const Json& j);

Json to_json(const std::vector<CandidateGrasp>& grasps);
std::vector<CandidateGrasp> grasps_from_json(const Json& j);

Json to_json(const TrajectoryPlan& plan);
TrajectoryPlan plan_from_json(const Json& j);

Json to_json(const GainSchedule& g);
GainSchedule gains_from_json(const Json& j);

/// Missing keys keep their defaults, so partial config files are valid.
Json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const Json& j);

Json to_json(const TickLog& t);
TickLog tick_from_json(const Json& j);

/// Line-delimited: a header line, one line per tick, then a summary line.
void write_trial_record(std::ostream& out, const TrialRecord& record);
TrialRecord read_trial_record(std::istream& in);

Json to_json(const ModeSummary& m);
/// Summary without the per-trial records.
Json to_json(const ExperimentSummary& s);

Json to_json(const Distribution& d);
Distribution distribution_from_json(const Json& j);

/// Writes plot_<mode>_<metric>.json for position error and execution time of every mode.
std::vector<std::filesystem::path> emit_plot_data(const ExperimentSummary& summary,
                                                  const std::filesystem::path& dir);

Json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const Json& j);

}  // namespace sgw
