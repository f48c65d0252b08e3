#include "rvspoof/cli.hpp"

#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "rvspoof/catalog.hpp"
#include "rvspoof/flow_model.hpp"
#include "rvspoof/loop_closure.hpp"
#include "rvspoof/placement.hpp"
#include "rvspoof/sim_loop.hpp"

namespace rvspoof {

namespace {

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsageFailure = 2;

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// Writes to the named file when given, otherwise to the primary stream.
class OutputTarget {
 public:
  OutputTarget(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : fallback_; }

 private:
  std::ofstream file_;
  std::ostream& fallback_;
};

std::set<SensorKind> parse_sensor_list(const std::string& list) {
  std::set<SensorKind> sensors;
  if (list == "all") {
    for (std::size_t i = 0; i < kSensorCount; ++i) sensors.insert(static_cast<SensorKind>(i));
    return sensors;
  }
  std::stringstream ss(list);
  std::string token;
  while (std::getline(ss, token, ',')) sensors.insert(sensor_from_string(token));
  return sensors;
}

int cmd_flows(const std::string& sensors_arg, const std::string& out_path,
              const std::string& format, std::ostream& out, std::ostream& err) {
  std::set<SensorKind> sensors;
  try {
    sensors = parse_sensor_list(sensors_arg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageFailure;
  }
  FunctionGraph graph = build_reference_graph();
  const auto flows = enumerate_action_flows(graph, sensors);

  OutputTarget target(out_path, out);
  if (format == "report") {
    target.stream() << "# rvspoof flows sensors=" << sensors_arg
                    << " config=" << hash_hex(fnv1a(sensors_arg)) << "\n";
    target.stream() << "# count=" << flows.size() << "\n";
  }
  for (const ActionFlow& flow : flows) target.stream() << format_flow_line(flow) << "\n";
  return kOk;
}

int cmd_catalog(const std::string& file, const std::string& cls, const std::string& sensor,
                const std::string& pattern, const std::string& status, const std::string& path,
                const std::string& out_path, const std::string& format, std::ostream& out,
                std::ostream& err) {
  Catalog catalog;
  try {
    catalog = load_catalog_file(file);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageFailure;
  }

  VectorQuery query;
  bool filtered = false;
  try {
    if (!cls.empty()) {
      filtered = true;
      if (cls == "C1") query.feasibility = FeasibilityClass::C1;
      else if (cls == "C2") query.feasibility = FeasibilityClass::C2;
      else if (cls == "C3") query.feasibility = FeasibilityClass::C3;
      else throw std::invalid_argument("class must be C1, C2 or C3");
    }
    if (!sensor.empty()) {
      filtered = true;
      query.sensor = sensor_from_string(sensor);
    }
    if (!pattern.empty()) {
      filtered = true;
      query.pattern = pattern_from_string(pattern);
    }
    if (!status.empty()) {
      filtered = true;
      if (status == "known") query.status = VectorStatus::known;
      else if (status == "unexplored") query.status = VectorStatus::unexplored;
      else throw std::invalid_argument("status must be known or unexplored");
    }
    if (!path.empty()) {
      filtered = true;
      query.attack_path = attack_path_from_string(path);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageFailure;
  }

  OutputTarget target(out_path, out);
  if (filtered) {
    const auto records = query_vectors(catalog, query);
    for (const AttackVectorRecord& record : records) {
      target.stream() << format_record_line(record) << "\n";
    }
    target.stream() << "matched=" << records.size() << "\n";
    return kOk;
  }
  const CoverageReport report = coverage_report(catalog);
  if (format == "report") {
    target.stream() << "# rvspoof catalog file=" << file
                    << " config=" << hash_hex(fnv1a(file)) << "\n";
    target.stream() << render_coverage_report(report);
  } else {
    target.stream() << render_coverage_table(report);
  }
  return kOk;
}

int cmd_sim(const std::string& scenario_path, const std::string& spoofs_path,
            std::uint64_t seed, const std::string& out_path, std::ostream& out,
            std::ostream& err) {
  Scenario scenario;
  SpoofPlan plan;
  try {
    scenario = load_scenario(scenario_path);
    if (!spoofs_path.empty()) plan = load_spoof_plan(spoofs_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageFailure;
  }
  try {
    SimulationResult result = run_scenario(scenario, plan, seed);
    OutputTarget target(out_path, out);
    write_trace(target.stream(), result.trace, result.report);
    out << "outcome=" << to_string(result.report.outcome);
    if (result.report.realized_path) out << " path=" << to_string(*result.report.realized_path);
    out << "\n";
    return kOk;
  } catch (const NoRouteError& e) {
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
}

int cmd_optimize(const std::string& scene_path, const std::string& config_path, bool with_oracle,
                 double oracle_grid, std::uint64_t seed, const std::string& out_path,
                 std::ostream& out, std::ostream& err) {
  PlacementScene scene;
  OptimizerConfig cfg;
  try {
    scene = load_placement_scene(scene_path);
    cfg = config_path.empty() ? OptimizerConfig{} : load_optimizer_config(config_path, scene);
    if (config_path.empty()) cfg.bounds = scene.bounds;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageFailure;
  }
  cfg.seed = seed;

  try {
    OptimizationResult result =
        optimize_placement(scene.detector, scene.cloud, scene.object, scene.target, cfg);

    OutputTarget target(out_path, out);
    std::ostream& os = target.stream();
    os << "# rvspoof optimize scene=" << scene_path << " seed=" << seed
       << " config=" << hash_hex(fnv1a(scene_path + "/" + std::to_string(seed))) << "\n";
    os << std::fixed << std::setprecision(6);
    os << "placement " << result.best_placement.x << ' ' << result.best_placement.y << ' '
       << result.best_placement.z << ' ' << result.best_placement.alpha << ' '
       << result.best_placement.beta << ' ' << result.best_placement.gamma << "\n";
    os << "best_loss " << result.best_loss << "\n";
    os << "gated_iterations " << result.gated_out_iterations << "\n";
    for (std::size_t i = 0; i < result.history.size(); ++i) {
      os << "history " << i << ' ' << result.history[i] << "\n";
    }

    if (with_oracle) {
      OracleResult oracle = brute_force_oracle(scene.detector, scene.cloud, scene.object,
                                               scene.target, scene.bounds, oracle_grid, 0.0,
                                               cfg.objective);
      const double ratio = oracle.best_loss > 0 ? result.best_loss / oracle.best_loss
                                                : (result.best_loss > 0 ? 1e9 : 1.0);
      os << "oracle_loss " << oracle.best_loss << "\n";
      os << "oracle_evaluations " << oracle.evaluations << "\n";
      std::ostringstream line;
      line << std::fixed << std::setprecision(4)
           << (ratio >= 0.90 ? "optimizer/oracle >= 0.90" : "optimizer/oracle < 0.90")
           << " (ratio=" << ratio << ")";
      os << line.str() << "\n";
      if (&os != &out) out << line.str() << "\n";
    }
    return kOk;
  } catch (const TargetNotFoundError& e) {
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
}

int cmd_loopclosure(const std::string& fixture_path, int budget, int min_matches, int min_groups,
                    const std::string& out_path, std::ostream& out, std::ostream& err) {
  LoopClosureFixture fixture;
  try {
    fixture = load_loop_closure_fixture(fixture_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageFailure;
  }
  LoopClosureConfig cfg;
  if (min_matches > 0) cfg.min_matches = min_matches;
  if (min_groups > 0) cfg.min_groups = min_groups;
  if (cfg.min_matches < cfg.min_groups) {
    err << "error: min-matches must be at least min-groups\n";
    return kUsageFailure;
  }

  const Keyframe* target = nullptr;
  for (const Keyframe& frame : fixture.database) {
    if (frame.id == fixture.target_id) target = &frame;
  }
  if (target == nullptr) {
    err << "error: fixture names no target frame in the database\n";
    return kUsageFailure;
  }

  const auto before = detect_loop_closure(fixture.current, fixture.database, cfg);
  OutputTarget target_out(out_path, out);
  std::ostream& os = target_out.stream();
  os << "# rvspoof loopclosure fixture=" << fixture_path
     << " config=" << hash_hex(fnv1a(fixture_path + "/" + std::to_string(budget))) << "\n";

  try {
    InjectionResult attack = inject_features(fixture.current, *target, cfg, budget);
    const auto after = detect_loop_closure(attack.modified, fixture.database, cfg);
    const MatchResult match = match_keyframes(attack.modified, *target, cfg);
    const FramePose relocated = relocalize(fixture.current.pose, *target);

    std::ostringstream summary;
    summary << "before=" << (before ? "closure" : "none")
            << " after=" << (after ? "closure" : "none")
            << " injected=" << attack.injected.size() << " pairs=" << match.similarity
            << " groups=" << match.consistent_groups;
    os << summary.str() << "\n";
    os << std::fixed << std::setprecision(3) << "relocalized " << relocated.x << ' '
       << relocated.y << ' ' << relocated.heading << "\n";
    for (const Keypoint& kp : attack.injected) {
      os << "injected " << kp.x << ' ' << kp.y << ' ' << kp.angle << ' ' << kp.scale << ' '
         << kp.descriptor.to_hex() << "\n";
    }
    if (&os != &out) out << summary.str() << "\n";
    return kOk;
  } catch (const BudgetExhaustedError& e) {
    os << "before=" << (before ? "closure" : "none")
       << " after=none budget_exhausted similarity=" << e.achieved_similarity << "\n";
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rvspoof: action-flow threat model, closed-loop spoofing simulator, and "
               "attack optimizers for robotic vehicles"};
  app.require_subcommand(1);

  std::string sensors_arg = "all";
  std::string out_path;
  std::string format = "table";
  std::uint64_t seed = 0;

  auto* flows = app.add_subcommand("flows", "Enumerate sensor-to-controller action flows");
  flows->add_option("--sensors", sensors_arg, "Comma-separated sensor list or 'all'");
  flows->add_option("--out", out_path, "Output file");
  flows->add_option("--format", format, "table|report");

  std::string catalog_file;
  std::string filter_class, filter_sensor, filter_pattern, filter_status, filter_path;
  auto* catalog = app.add_subcommand("catalog", "Coverage report over an attack-vector catalog");
  catalog->add_option("--file", catalog_file, "Catalog file")->required();
  catalog->add_option("--class", filter_class, "Filter by feasibility class C1|C2|C3");
  catalog->add_option("--sensor", filter_sensor, "Filter by sensor");
  catalog->add_option("--pattern", filter_pattern, "Filter by flow pattern FP1..FP14");
  catalog->add_option("--status", filter_status, "Filter by status known|unexplored");
  catalog->add_option("--path", filter_path, "Filter by attack path AtkPath1..AtkPath7");
  catalog->add_option("--out", out_path, "Output file");
  catalog->add_option("--format", format, "table|report");

  std::string scenario_path, spoofs_path;
  auto* sim = app.add_subcommand("sim", "Run a closed-loop scenario");
  sim->add_option("--scenario", scenario_path, "Scenario file")->required();
  sim->add_option("--spoofs", spoofs_path, "Spoof plan file");
  sim->add_option("--seed", seed, "Simulation seed");
  sim->add_option("--out", out_path, "Trace output file");

  std::string scene_path, optimizer_config;
  bool with_oracle = false;
  double oracle_grid = 0.25;
  auto* optimize = app.add_subcommand("optimize", "Adversarial placement search");
  optimize->add_option("--scene", scene_path, "Scene file")->required();
  optimize->add_option("--config", optimizer_config, "Optimizer config file");
  optimize->add_flag("--oracle", with_oracle, "Compare against the brute-force grid oracle");
  optimize->add_option("--grid", oracle_grid, "Oracle translation grid step");
  optimize->add_option("--seed", seed, "Optimizer seed");
  optimize->add_option("--out", out_path, "Result output file");

  std::string fixture_path;
  int budget = 40;
  int min_matches = 0, min_groups = 0;
  auto* loopclosure = app.add_subcommand("loopclosure", "Loop-closure injection attack");
  loopclosure->add_option("--fixture", fixture_path, "Keyframe fixture file")->required();
  loopclosure->add_option("--budget", budget, "Injection budget");
  loopclosure->add_option("--min-matches", min_matches, "Similarity threshold override");
  loopclosure->add_option("--min-groups", min_groups, "Group threshold override");
  loopclosure->add_option("--out", out_path, "Result output file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << "\n";
    return kUsageFailure;
  }

  try {
    if (flows->parsed()) return cmd_flows(sensors_arg, out_path, format, out, err);
    if (catalog->parsed()) {
      return cmd_catalog(catalog_file, filter_class, filter_sensor, filter_pattern,
                         filter_status, filter_path, out_path, format, out, err);
    }
    if (sim->parsed()) return cmd_sim(scenario_path, spoofs_path, seed, out_path, out, err);
    if (optimize->parsed()) {
      return cmd_optimize(scene_path, optimizer_config, with_oracle, oracle_grid, seed, out_path,
                          out, err);
    }
    if (loopclosure->parsed()) {
      return cmd_loopclosure(fixture_path, budget, min_matches, min_groups, out_path, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
  err << "error: no subcommand\n";
  return kUsageFailure;
}

}  // namespace rvspoof
