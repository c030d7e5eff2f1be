// Python extension: JSON-text entry points over the C++ core. The sgw package
// wraps these and converts to and from Python objects.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sgw/bridge.hpp"
#include "sgw/error.hpp"
#include "sgw/io.hpp"

namespace py = pybind11;
using namespace sgw;

namespace {

ExperimentConfig parse_config(const std::string& text) {
  return text.empty() ? ExperimentConfig{} : config_from_json(Json::parse(text));
}

ContactModel parse_model(const std::string& text, const ExperimentConfig& cfg) {
  return text.empty() ? learn_from_demonstration(default_demonstration(), cfg)
                      : contact_model_from_json(Json::parse(text));
}

std::string learn(const std::string& config) {
  return to_json(learn_from_demonstration(default_demonstration(), parse_config(config))).dump();
}

std::string scene(std::uint64_t seed, const std::string& config) {
  return to_json(generate_scene(seed, parse_config(config).scene)).dump();
}

std::string sample(const std::string& scene_text, std::uint64_t seed, const std::string& config,
                   const std::string& model) {
  const auto cfg = parse_config(config);
  const Landscape s = scene_from_json(Json::parse(scene_text));
  const auto density = build_query_density(parse_model(model, cfg), extract_features(s, cfg.features), cfg.query);
  return to_json(sample_grasps(density, cfg.gripper, s, cfg.grasp_samples, seed, cfg.sampling)).dump();
}

py::tuple experiment(const std::string& config, const std::string& model) {
  const auto cfg = parse_config(config);
  ExperimentSummary summary;
  {
    py::gil_scoped_release release;
    summary = run_experiment(cfg, parse_model(model, cfg));
  }
  py::list records;
  for (const auto& r : summary.records) {
    std::ostringstream out;
    write_trial_record(out, r);
    records.append(out.str());
  }
  return py::make_tuple(to_json(summary).dump(), records);
}

bool replay(const std::string& config, const std::string& model, const std::string& record_text) {
  const auto cfg = parse_config(config);
  std::istringstream in(record_text);
  const auto record = read_trial_record(in);
  return replay_record(cfg, parse_model(model, cfg), record) == record;
}

std::string describe_json(const std::string& mode, const std::string& metric, const std::vector<double>& values) {
  return to_json(describe(mode, metric, values)).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Shared-control grasping workbench core";

  // Translators run newest first, so the subclass is registered after its base.
  const auto& error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", error.ptr());

  m.attr("PROTOCOL") = kProtocol;
  m.attr("FORMAT_VERSION") = kFormatVersion;

  m.def("default_config", [] { return to_json(ExperimentConfig{}).dump(); });
  m.def("config_hash", [](const std::string& config) { return config_hash(parse_config(config)); });
  m.def("learn_demo_model", &learn, py::arg("config") = "");
  m.def("generate_scene", &scene, py::arg("seed"), py::arg("config") = "");
  m.def("sample_grasps", &sample, py::arg("scene"), py::arg("seed"), py::arg("config") = "",
        py::arg("model") = "");
  m.def("run_experiment", &experiment, py::arg("config") = "", py::arg("model") = "",
        "Returns the summary JSON and one line-delimited record per trial and mode.");
  m.def("replay_matches", &replay, py::arg("config"), py::arg("model"), py::arg("record"));
  m.def("describe", &describe_json, py::arg("mode"), py::arg("metric"), py::arg("values"));
  m.def("numpad_velocity", [](const std::string& keys, double speed) {
    const Vec2 v = numpad_velocity(keys, speed);
    return std::make_pair(v.x(), v.y());
  });

  py::class_<BridgeSession>(m, "BridgeSession")
      .def(py::init([](const std::string& config, const std::string& model, std::uint64_t seed) {
             const auto cfg = parse_config(config);
             return BridgeSession(cfg, parse_model(model, cfg), seed);
           }),
           py::arg("config") = "", py::arg("model") = "", py::arg("seed") = 1)
      .def("handle",
           [](BridgeSession& s, const std::string& text) -> std::optional<std::string> {
             if (auto err = s.handle(text)) return err->dump();
             return std::nullopt;
           })
      .def("tick", [](BridgeSession& s) { return s.tick().dump(); })
      .def("frame", [](const BridgeSession& s) { return s.frame().dump(); });
}
