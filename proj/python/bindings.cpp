// Python bindings over the main operations: flow enumeration, catalog
// coverage, closed-loop simulation, placement optimization, and the
// loop-closure attack. Inputs are file paths and plain values; results come
// back as dicts, mirroring the CLI surface.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rvspoof/catalog.hpp"
#include "rvspoof/cli.hpp"
#include "rvspoof/flow_model.hpp"
#include "rvspoof/loop_closure.hpp"
#include "rvspoof/placement.hpp"
#include "rvspoof/sim_loop.hpp"

namespace py = pybind11;
using namespace rvspoof;

namespace {

std::vector<std::string> enumerate_flow_lines(const std::vector<std::string>& sensors) {
  std::set<SensorKind> kinds;
  if (sensors.empty() || (sensors.size() == 1 && sensors[0] == "all")) {
    for (std::size_t i = 0; i < kSensorCount; ++i) kinds.insert(static_cast<SensorKind>(i));
  } else {
    for (const std::string& name : sensors) kinds.insert(sensor_from_string(name));
  }
  FunctionGraph graph = build_reference_graph();
  std::vector<std::string> lines;
  for (const ActionFlow& flow : enumerate_action_flows(graph, kinds)) {
    lines.push_back(format_flow_line(flow));
  }
  return lines;
}

py::dict coverage_dict(const std::string& catalog_path) {
  Catalog catalog = load_catalog_file(catalog_path);
  CoverageReport report = coverage_report(catalog);
  py::dict out;
  out["total"] = report.total;
  out["known"] = report.known;
  out["unexplored"] = report.unexplored;
  py::dict classes;
  for (auto cls : {FeasibilityClass::C1, FeasibilityClass::C2, FeasibilityClass::C3}) {
    auto it = report.per_class.find(cls);
    classes[py::str(std::string(to_string(cls)))] =
        it == report.per_class.end() ? 0 : it->second;
  }
  out["classes"] = classes;
  py::dict patterns;
  for (const auto& [pattern, total] : report.per_pattern_total) {
    auto known_it = report.per_pattern_known.find(pattern);
    py::dict entry;
    entry["total"] = total;
    entry["known"] = known_it == report.per_pattern_known.end() ? 0 : known_it->second;
    patterns[py::str(std::string(to_string(pattern)))] = entry;
  }
  out["patterns"] = patterns;
  return out;
}

py::dict simulate(const std::string& scenario_path, const std::string& spoofs_path,
                  std::uint64_t seed) {
  Scenario scenario = load_scenario(scenario_path);
  SpoofPlan plan;
  if (!spoofs_path.empty()) plan = load_spoof_plan(spoofs_path);
  SimulationResult result = run_scenario(scenario, plan, seed);
  py::dict out;
  out["outcome"] = std::string(to_string(result.report.outcome));
  out["path"] = result.report.realized_path
                    ? py::object(py::str(std::string(to_string(*result.report.realized_path))))
                    : py::object(py::none());
  out["steps"] = result.trace.steps.size();
  std::ostringstream hash;
  hash << std::hex << trace_hash(result.trace);
  out["trace_hash"] = hash.str();
  const TraceStep& last = result.trace.steps.back();
  out["final_position"] = py::make_tuple(last.truth.position.x, last.truth.position.y);
  return out;
}

py::dict optimize(const std::string& scene_path, std::uint64_t seed, int iterations, int samples,
                  double epsilon, double threshold) {
  PlacementScene scene = load_placement_scene(scene_path);
  OptimizerConfig cfg;
  cfg.bounds = scene.bounds;
  cfg.seed = seed;
  cfg.iterations = iterations;
  cfg.samples = samples;
  cfg.epsilon = epsilon;
  cfg.threshold = threshold;
  OptimizationResult result =
      optimize_placement(scene.detector, scene.cloud, scene.object, scene.target, cfg);
  py::dict out;
  out["best_loss"] = result.best_loss;
  out["history"] = result.history;
  const Placement& s = result.best_placement;
  out["placement"] = py::make_tuple(s.x, s.y, s.z, s.alpha, s.beta, s.gamma);
  out["gated_iterations"] = result.gated_out_iterations;
  return out;
}

py::dict oracle(const std::string& scene_path, double grid_step, double angle_step) {
  PlacementScene scene = load_placement_scene(scene_path);
  OracleResult result = brute_force_oracle(scene.detector, scene.cloud, scene.object,
                                           scene.target, scene.bounds, grid_step, angle_step);
  py::dict out;
  out["best_loss"] = result.best_loss;
  const Placement& s = result.best_placement;
  out["placement"] = py::make_tuple(s.x, s.y, s.z, s.alpha, s.beta, s.gamma);
  out["evaluations"] = result.evaluations;
  return out;
}

py::dict loop_closure_attack(const std::string& fixture_path, int budget) {
  LoopClosureFixture fixture = load_loop_closure_fixture(fixture_path);
  LoopClosureConfig cfg;
  const Keyframe* target = nullptr;
  for (const Keyframe& frame : fixture.database) {
    if (frame.id == fixture.target_id) target = &frame;
  }
  if (target == nullptr) throw std::runtime_error("fixture names no target frame");

  py::dict out;
  out["before"] =
      detect_loop_closure(fixture.current, fixture.database, cfg).has_value() ? "closure" : "none";
  try {
    InjectionResult attack = inject_features(fixture.current, *target, cfg, budget);
    MatchResult match = match_keyframes(attack.modified, *target, cfg);
    out["after"] =
        detect_loop_closure(attack.modified, fixture.database, cfg).has_value() ? "closure"
                                                                                : "none";
    out["injected"] = attack.injected.size();
    out["pairs"] = match.similarity;
    out["groups"] = match.consistent_groups;
    const FramePose pose = relocalize(fixture.current.pose, *target);
    out["relocalized"] = py::make_tuple(pose.x, pose.y, pose.heading);
  } catch (const BudgetExhaustedError& e) {
    out["after"] = "none";
    out["injected"] = budget;
    out["pairs"] = e.achieved_similarity;
    out["budget_exhausted"] = true;
  }
  return out;
}

py::tuple cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_rvspoof, m) {
  m.doc() = "Sensor-spoofing threat flows, closed-loop simulation, and attack optimizers "
            "for robotic vehicles";

  m.def("enumerate_flows", &enumerate_flow_lines, py::arg("sensors") = std::vector<std::string>{},
        "Formatted action-flow lines for the given sensors ('all' or empty for every sensor)");
  m.def("coverage", &coverage_dict, py::arg("catalog_path"),
        "Coverage totals for an attack-vector catalog file");
  m.def("simulate", &simulate, py::arg("scenario_path"), py::arg("spoofs_path") = "",
        py::arg("seed") = 0,
        "Run a closed-loop scenario; returns outcome, realized path, and trace hash");
  m.def("optimize_placement", &optimize, py::arg("scene_path"), py::arg("seed") = 0,
        py::arg("iterations") = 50, py::arg("samples") = 20, py::arg("epsilon") = 0.1,
        py::arg("threshold") = 0.0, "Zeroth-order placement search over a scene file");
  m.def("oracle", &oracle, py::arg("scene_path"), py::arg("grid_step") = 0.25,
        py::arg("angle_step") = 0.0, "Exhaustive grid search over the scene bounds");
  m.def("loop_closure_attack", &loop_closure_attack, py::arg("fixture_path"),
        py::arg("budget") = 40, "Feature-injection attack on a keyframe fixture");
  m.def("cli", &cli, py::arg("args"), "Run a CLI invocation in-process");
}
