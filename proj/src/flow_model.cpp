#include "rvspoof/flow_model.hpp"

#include <algorithm>
#include <sstream>

namespace rvspoof {

namespace {

constexpr std::array<std::string_view, kFunctionCount> kFunctionNames = {
    "A1", "A2", "A3", "A4", "A5", "B", "C1", "C2", "D1", "D2", "E", "F"};

constexpr std::array<std::string_view, kSensorCount> kSensorNames = {
    "GPS", "LiDAR", "Camera", "IMU", "Microphone", "Ultrasonic", "MMWRadar"};

std::size_t index_of(RoboticFunction fn) { return static_cast<std::size_t>(fn); }

}  // namespace

std::string_view to_string(RoboticFunction fn) { return kFunctionNames[index_of(fn)]; }

std::string_view to_string(SensorKind kind) {
  return kSensorNames[static_cast<std::size_t>(kind)];
}

RoboticFunction function_from_string(std::string_view text) {
  for (std::size_t i = 0; i < kFunctionCount; ++i) {
    if (kFunctionNames[i] == text) return static_cast<RoboticFunction>(i);
  }
  throw std::invalid_argument("unknown robotic function: " + std::string(text));
}

SensorKind sensor_from_string(std::string_view text) {
  for (std::size_t i = 0; i < kSensorCount; ++i) {
    if (kSensorNames[i] == text) return static_cast<SensorKind>(i);
  }
  // Accept lowercase spellings from CLI arguments.
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (std::size_t i = 0; i < kSensorCount; ++i) {
    std::string name(kSensorNames[i]);
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (name == lower) return static_cast<SensorKind>(i);
  }
  throw UnknownSensorError("unknown sensor: " + std::string(text));
}

std::string_view to_string(FlowPattern pattern) {
  static const std::array<std::string, 14> names = [] {
    std::array<std::string, 14> a;
    for (int i = 0; i < 14; ++i) a[i] = "FP" + std::to_string(i + 1);
    return a;
  }();
  return names[static_cast<int>(pattern) - 1];
}

std::string_view to_string(AttackPath path) {
  static const std::array<std::string, 7> names = [] {
    std::array<std::string, 7> a;
    for (int i = 0; i < 7; ++i) a[i] = "AtkPath" + std::to_string(i + 1);
    return a;
  }();
  return names[static_cast<int>(path) - 1];
}

FlowPattern pattern_from_string(std::string_view text) {
  for (int i = 1; i <= 14; ++i) {
    if (text == to_string(static_cast<FlowPattern>(i))) return static_cast<FlowPattern>(i);
  }
  throw std::invalid_argument("unknown flow pattern: " + std::string(text));
}

AttackPath attack_path_from_string(std::string_view text) {
  for (int i = 1; i <= 7; ++i) {
    if (text == to_string(static_cast<AttackPath>(i))) return static_cast<AttackPath>(i);
  }
  throw std::invalid_argument("unknown attack path: " + std::string(text));
}

int rounds_of(AttackPath path) {
  return (path == AttackPath::AtkPath6 || path == AttackPath::AtkPath7) ? 2 : 1;
}

std::string_view to_string(TwoRoundMode mode) {
  return mode == TwoRoundMode::blurring ? "blurring" : "roi";
}

const std::vector<std::string>& pattern_attacks(FlowPattern pattern) {
  static const std::map<FlowPattern, std::vector<std::string>> table = {
      {FlowPattern::FP1,
       {"Obstacle Appearing", "Obstacle Missing", "Traffic Controller Misclassification"}},
      {FlowPattern::FP2, {"Trajectory Appearing", "Trajectory Missing", "Trajectory Altering"}},
      {FlowPattern::FP3, {"Lane Altering"}},
      {FlowPattern::FP4, {"Deviating Position Altering"}},
      {FlowPattern::FP5, {"Predicted Priority Altering"}},
      {FlowPattern::FP6, {"Target Deviating Position Altering", "Loop Closure Failure"}},
      {FlowPattern::FP7, {"Destabilizing Velocity Altering", "Destabilizing Position Altering"}},
      {FlowPattern::FP8, {"Specific Location Altering"}},
      {FlowPattern::FP9, {"Obstacle Distance Altering"}},
      {FlowPattern::FP10, {"Lateral Distance Altering"}},
      {FlowPattern::FP11, {"Target Goal Generation"}},
      {FlowPattern::FP12, {"Target Goal Generation"}},
      {FlowPattern::FP13, {"Target Goal Generation"}},
      {FlowPattern::FP14, {"Target Blurring", "ROI Altering"}},
  };
  return table.at(pattern);
}

void FunctionGraph::add_edge(RoboticFunction from, RoboticFunction to) {
  auto& out = adjacency_[index_of(from)];
  if (std::find(out.begin(), out.end(), to) == out.end()) out.push_back(to);
}

void FunctionGraph::remove_edge(RoboticFunction from, RoboticFunction to) {
  auto& out = adjacency_[index_of(from)];
  out.erase(std::remove(out.begin(), out.end(), to), out.end());
}

void FunctionGraph::bind_sensor(SensorKind kind, std::set<RoboticFunction> entries) {
  bindings_[kind] = std::move(entries);
}

bool FunctionGraph::has_edge(RoboticFunction from, RoboticFunction to) const {
  const auto& out = adjacency_[index_of(from)];
  return std::find(out.begin(), out.end(), to) != out.end();
}

const std::vector<RoboticFunction>& FunctionGraph::successors(RoboticFunction from) const {
  return adjacency_[index_of(from)];
}

std::size_t FunctionGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& out : adjacency_) n += out.size();
  return n;
}

std::size_t FunctionGraph::out_degree(RoboticFunction fn) const {
  return adjacency_[index_of(fn)].size();
}

bool FunctionGraph::is_acyclic() const {
  // 0 = unvisited, 1 = on stack, 2 = done.
  std::array<int, kFunctionCount> state{};
  auto dfs = [&](auto&& self, std::size_t node) -> bool {
    state[node] = 1;
    for (RoboticFunction next : adjacency_[node]) {
      std::size_t n = index_of(next);
      if (state[n] == 1) return false;
      if (state[n] == 0 && !self(self, n)) return false;
    }
    state[node] = 2;
    return true;
  };
  for (std::size_t i = 0; i < kFunctionCount; ++i) {
    if (state[i] == 0 && !dfs(dfs, i)) return false;
  }
  return true;
}

bool FunctionGraph::entries_reach_terminal() const {
  auto reaches_f = [&](RoboticFunction start) {
    std::vector<RoboticFunction> stack{start};
    std::array<bool, kFunctionCount> seen{};
    while (!stack.empty()) {
      RoboticFunction fn = stack.back();
      stack.pop_back();
      if (fn == RoboticFunction::F) return true;
      if (seen[index_of(fn)]) continue;
      seen[index_of(fn)] = true;
      for (RoboticFunction next : adjacency_[index_of(fn)]) stack.push_back(next);
    }
    return false;
  };
  for (const auto& [kind, entries] : bindings_) {
    for (RoboticFunction entry : entries) {
      if (!reaches_f(entry)) return false;
    }
  }
  return true;
}

FunctionGraph build_reference_graph() {
  using RF = RoboticFunction;
  FunctionGraph g;
  const std::pair<RF, RF> edges[] = {
      {RF::A1, RF::E},  {RF::A1, RF::B},  {RF::B, RF::C1},  {RF::A2, RF::C1},
      {RF::A3, RF::C1}, {RF::A3, RF::D1}, {RF::A3, RF::D2}, {RF::A3, RF::E},
      {RF::A3, RF::F},  {RF::A4, RF::C2}, {RF::C2, RF::D1}, {RF::C2, RF::D2},
      {RF::C2, RF::F},  {RF::A5, RF::D2}, {RF::A5, RF::F},  {RF::C1, RF::E},
      {RF::D1, RF::E},  {RF::D2, RF::E},  {RF::E, RF::F},
  };
  for (auto [from, to] : edges) g.add_edge(from, to);
  g.bind_sensor(SensorKind::MMWRadar, {RF::A1});
  g.bind_sensor(SensorKind::LiDAR, {RF::A1, RF::A3});
  g.bind_sensor(SensorKind::Camera, {RF::A1, RF::A2, RF::A3});
  g.bind_sensor(SensorKind::GPS, {RF::A3});
  g.bind_sensor(SensorKind::IMU, {RF::A3});
  g.bind_sensor(SensorKind::Microphone, {RF::A4});
  g.bind_sensor(SensorKind::Ultrasonic, {RF::A5});
  return g;
}

namespace {

struct CanonicalRow {
  int id;
  SensorKind sensor;
  const char* sequence;
  FlowPattern pattern;
  AttackPath path;
  // Two-round rows only:
  SensorKind second_sensor = SensorKind::Camera;
  TwoRoundMode mode = TwoRoundMode::blurring;
};

// Canonical AF1..AF44 table for the reference configuration. Labels and row
// order are pinned here; the golden flow listing is rendered from this data.
const std::vector<CanonicalRow>& canonical_rows() {
  using SK = SensorKind;
  using FP = FlowPattern;
  using AP = AttackPath;
  static const std::vector<CanonicalRow> rows = {
      {1, SK::MMWRadar, "A1-E-F", FP::FP1, AP::AtkPath4},
      {2, SK::MMWRadar, "A1-B-C1-E-F", FP::FP2, AP::AtkPath5},
      {3, SK::LiDAR, "A1-E-F", FP::FP1, AP::AtkPath4},
      {4, SK::LiDAR, "A1-B-C1-E-F", FP::FP2, AP::AtkPath5},
      {5, SK::LiDAR, "A3-C1-E-F", FP::FP5, AP::AtkPath3},
      {6, SK::LiDAR, "A3-D1-E-F", FP::FP6, AP::AtkPath3},
      {7, SK::LiDAR, "A3-D2-E-F", FP::FP8, AP::AtkPath2},
      {8, SK::LiDAR, "A3-E-F", FP::FP4, AP::AtkPath3},
      {9, SK::LiDAR, "A3-F", FP::FP7, AP::AtkPath1},
      {10, SK::Camera, "A1-E-F", FP::FP1, AP::AtkPath4},
      {11, SK::Camera, "A1-B-C1-E-F", FP::FP2, AP::AtkPath5},
      {12, SK::Camera, "A2-C1-E-F", FP::FP3, AP::AtkPath4},
      {13, SK::Camera, "A3-C1-E-F", FP::FP5, AP::AtkPath3},
      {14, SK::Camera, "A3-D1-E-F", FP::FP6, AP::AtkPath3},
      {15, SK::Camera, "A3-D2-E-F", FP::FP8, AP::AtkPath2},
      {16, SK::Camera, "A3-E-F", FP::FP4, AP::AtkPath3},
      {17, SK::Camera, "A3-F", FP::FP7, AP::AtkPath1},
      {18, SK::GPS, "A3-C1-E-F", FP::FP5, AP::AtkPath3},
      {19, SK::GPS, "A3-D1-E-F", FP::FP6, AP::AtkPath3},
      {20, SK::GPS, "A3-D2-E-F", FP::FP8, AP::AtkPath2},
      {21, SK::GPS, "A3-E-F", FP::FP4, AP::AtkPath3},
      {22, SK::GPS, "A3-F", FP::FP7, AP::AtkPath1},
      {23, SK::IMU, "A3-C1-E-F", FP::FP5, AP::AtkPath3},
      {24, SK::IMU, "A3-D1-E-F", FP::FP6, AP::AtkPath3},
      {25, SK::IMU, "A3-D2-E-F", FP::FP8, AP::AtkPath2},
      {26, SK::IMU, "A3-E-F", FP::FP4, AP::AtkPath3},
      {27, SK::IMU, "A3-F", FP::FP7, AP::AtkPath1},
      {28, SK::Microphone, "A4-C2-F", FP::FP12, AP::AtkPath5},
      {29, SK::Microphone, "A4-C2-D1-E-F", FP::FP11, AP::AtkPath5},
      {30, SK::Microphone, "A4-C2-D2-E-F", FP::FP13, AP::AtkPath5},
      {31, SK::Ultrasonic, "A5-D2-E-F", FP::FP9, AP::AtkPath4},
      {32, SK::Ultrasonic, "A5-F", FP::FP10, AP::AtkPath4},
      // Two-round flows, grouped by first-round sensor.
      {33, SK::IMU, "A3-F", FP::FP14, AP::AtkPath6, SK::Camera, TwoRoundMode::blurring},
      {34, SK::IMU, "A3-F", FP::FP14, AP::AtkPath6, SK::LiDAR, TwoRoundMode::blurring},
      {35, SK::IMU, "A3-F", FP::FP14, AP::AtkPath7, SK::Camera, TwoRoundMode::roi},
      {36, SK::Camera, "A3-F", FP::FP14, AP::AtkPath6, SK::Camera, TwoRoundMode::blurring},
      {37, SK::Camera, "A3-F", FP::FP14, AP::AtkPath6, SK::LiDAR, TwoRoundMode::blurring},
      {38, SK::Camera, "A3-F", FP::FP14, AP::AtkPath7, SK::Camera, TwoRoundMode::roi},
      {39, SK::LiDAR, "A3-F", FP::FP14, AP::AtkPath6, SK::Camera, TwoRoundMode::blurring},
      {40, SK::LiDAR, "A3-F", FP::FP14, AP::AtkPath6, SK::LiDAR, TwoRoundMode::blurring},
      {41, SK::LiDAR, "A3-F", FP::FP14, AP::AtkPath7, SK::Camera, TwoRoundMode::roi},
      {42, SK::GPS, "A3-F", FP::FP14, AP::AtkPath6, SK::Camera, TwoRoundMode::blurring},
      {43, SK::GPS, "A3-F", FP::FP14, AP::AtkPath6, SK::LiDAR, TwoRoundMode::blurring},
      {44, SK::GPS, "A3-F", FP::FP14, AP::AtkPath7, SK::Camera, TwoRoundMode::roi},
  };
  return rows;
}

// Is the graph+bindings pair exactly the reference configuration? Labels are
// only canonical there.
bool is_reference_config(const FunctionGraph& graph) {
  static const FunctionGraph ref = build_reference_graph();
  if (graph.edge_count() != ref.edge_count()) return false;
  for (std::size_t i = 0; i < kFunctionCount; ++i) {
    auto fn = static_cast<RoboticFunction>(i);
    for (RoboticFunction to : ref.successors(fn)) {
      if (!graph.has_edge(fn, to)) return false;
    }
  }
  return graph.sensor_bindings() == ref.sensor_bindings();
}

std::string sequence_key(const std::vector<RoboticFunction>& fns) {
  std::string key;
  for (RoboticFunction fn : fns) {
    if (!key.empty()) key += '-';
    key += to_string(fn);
  }
  return key;
}

// Simple entry->F paths, depth-first with successor order as inserted.
void collect_paths(const FunctionGraph& graph, RoboticFunction entry,
                   std::vector<std::vector<RoboticFunction>>* out) {
  std::vector<RoboticFunction> path{entry};
  std::array<bool, kFunctionCount> on_path{};
  on_path[static_cast<std::size_t>(entry)] = true;
  auto dfs = [&](auto&& self, RoboticFunction node) -> void {
    if (node == RoboticFunction::F) {
      out->push_back(path);
      return;
    }
    for (RoboticFunction next : graph.successors(node)) {
      std::size_t n = static_cast<std::size_t>(next);
      if (on_path[n]) continue;
      on_path[n] = true;
      path.push_back(next);
      self(self, next);
      path.pop_back();
      on_path[n] = false;
    }
  };
  dfs(dfs, entry);
}

std::optional<FlowPattern> single_round_pattern(const std::vector<RoboticFunction>& fns) {
  static const std::map<std::string, FlowPattern> shapes = {
      {"A1-E-F", FlowPattern::FP1},       {"A1-B-C1-E-F", FlowPattern::FP2},
      {"A2-C1-E-F", FlowPattern::FP3},    {"A3-E-F", FlowPattern::FP4},
      {"A3-C1-E-F", FlowPattern::FP5},    {"A3-D1-E-F", FlowPattern::FP6},
      {"A3-F", FlowPattern::FP7},         {"A3-D2-E-F", FlowPattern::FP8},
      {"A5-D2-E-F", FlowPattern::FP9},    {"A5-F", FlowPattern::FP10},
      {"A4-C2-D1-E-F", FlowPattern::FP11},{"A4-C2-F", FlowPattern::FP12},
      {"A4-C2-D2-E-F", FlowPattern::FP13},
  };
  auto it = shapes.find(sequence_key(fns));
  if (it == shapes.end()) return std::nullopt;
  return it->second;
}

}  // namespace

FlowPattern classify_pattern(const ActionFlow& flow) {
  if (flow.rounds == 2) return FlowPattern::FP14;
  auto pattern = single_round_pattern(flow.functions);
  if (!pattern) {
    throw UnclassifiableFlowError("no flow pattern matches sequence " +
                                  sequence_key(flow.functions));
  }
  return *pattern;
}

AttackPath assign_attack_path(const ActionFlow& flow) {
  switch (classify_pattern(flow)) {
    case FlowPattern::FP1:
    case FlowPattern::FP3:
    case FlowPattern::FP9:
    case FlowPattern::FP10:
      return AttackPath::AtkPath4;
    case FlowPattern::FP2:
    case FlowPattern::FP11:
    case FlowPattern::FP12:
    case FlowPattern::FP13:
      return AttackPath::AtkPath5;
    case FlowPattern::FP4:
    case FlowPattern::FP5:
    case FlowPattern::FP6:
      return AttackPath::AtkPath3;
    case FlowPattern::FP7:
      return AttackPath::AtkPath1;
    case FlowPattern::FP8:
      return AttackPath::AtkPath2;
    case FlowPattern::FP14:
      return (flow.second_round && flow.second_round->mode == TwoRoundMode::roi)
                 ? AttackPath::AtkPath7
                 : AttackPath::AtkPath6;
  }
  throw UnclassifiableFlowError("unreachable pattern");
}

ActionFlow compose_two_round(const ActionFlow& first, const ActionFlow& second,
                             TwoRoundMode mode) {
  if (first.rounds != 1 || second.rounds != 1) {
    throw CombinationUnsupportedError("only single-round flows compose");
  }
  FlowPattern fp_first = classify_pattern(first);
  FlowPattern fp_second = classify_pattern(second);
  if (fp_first != FlowPattern::FP7) {
    throw CombinationUnsupportedError(
        "first round must be a stabilization flow (A3-F); instant/long-term "
        "mixes do not compose");
  }
  if (fp_second != FlowPattern::FP1 ||
      (second.sensor != SensorKind::Camera && second.sensor != SensorKind::LiDAR)) {
    throw CombinationUnsupportedError(
        "second round must be a Camera or LiDAR detection flow (A1-E-F)");
  }
  if (mode == TwoRoundMode::roi && second.sensor != SensorKind::Camera) {
    throw CombinationUnsupportedError("roi composition requires a Camera second round");
  }
  ActionFlow flow;
  flow.sensor = first.sensor;
  flow.functions = first.functions;
  flow.pattern = FlowPattern::FP14;
  flow.rounds = 2;
  flow.second_round = SecondRound{second.sensor, second.functions, mode};
  flow.attack_path = assign_attack_path(flow);
  // Canonical label when this composition exists in the reference table.
  for (const CanonicalRow& row : canonical_rows()) {
    if (row.pattern == FlowPattern::FP14 && row.sensor == flow.sensor &&
        row.second_sensor == second.sensor && row.mode == mode) {
      flow.id = "AF" + std::to_string(row.id);
      break;
    }
  }
  return flow;
}

std::vector<ActionFlow> enumerate_action_flows(const FunctionGraph& graph,
                                               const std::set<SensorKind>& sensors) {
  for (SensorKind kind : sensors) {
    if (!graph.is_bound(kind)) {
      throw UnknownSensorError("sensor has no entry-function binding: " +
                               std::string(to_string(kind)));
    }
  }

  const bool reference = is_reference_config(graph);

  // Single-round flows per sensor binding.
  std::vector<ActionFlow> singles;
  for (const auto& [kind, entries] : graph.sensor_bindings()) {
    if (!sensors.count(kind)) continue;
    std::vector<std::vector<RoboticFunction>> paths;
    for (RoboticFunction entry : entries) collect_paths(graph, entry, &paths);
    std::sort(paths.begin(), paths.end(), [](const auto& a, const auto& b) {
      if (a.size() != b.size()) return a.size() < b.size();
      return sequence_key(a) < sequence_key(b);
    });
    for (auto& path : paths) {
      ActionFlow flow;
      flow.sensor = kind;
      flow.functions = std::move(path);
      flow.rounds = 1;
      flow.pattern = classify_pattern(flow);
      flow.attack_path = assign_attack_path(flow);
      singles.push_back(std::move(flow));
    }
  }

  // Two-round compositions over the singles present in this configuration.
  std::vector<ActionFlow> flows = singles;
  for (const ActionFlow& first : singles) {
    if (first.pattern != FlowPattern::FP7) continue;
    for (const ActionFlow& second : singles) {
      for (TwoRoundMode mode : {TwoRoundMode::blurring, TwoRoundMode::roi}) {
        try {
          flows.push_back(compose_two_round(first, second, mode));
        } catch (const CombinationUnsupportedError&) {
        }
      }
    }
  }

  if (reference) {
    // Attach canonical labels and order by them.
    for (ActionFlow& flow : flows) {
      for (const CanonicalRow& row : canonical_rows()) {
        if (row.pattern != flow.pattern || row.sensor != flow.sensor) continue;
        if (flow.rounds == 1) {
          if (sequence_key(flow.functions) == row.sequence) {
            flow.id = "AF" + std::to_string(row.id);
            break;
          }
        } else if (flow.second_round && row.second_sensor == flow.second_round->sensor &&
                   row.mode == flow.second_round->mode) {
          flow.id = "AF" + std::to_string(row.id);
          break;
        }
      }
    }
    std::sort(flows.begin(), flows.end(), [](const ActionFlow& a, const ActionFlow& b) {
      return std::stoi(a.id.substr(2)) < std::stoi(b.id.substr(2));
    });
  } else {
    int next = 1;
    for (ActionFlow& flow : flows) {
      flow.id = "AF" + std::to_string(next++);
    }
  }
  return flows;
}

std::string format_flow_line(const ActionFlow& flow) {
  std::ostringstream os;
  os << flow.id << ' ' << to_string(flow.sensor) << ' ';
  os << sequence_key(flow.functions);
  os << " pattern=" << to_string(flow.pattern);
  os << " path=" << to_string(flow.attack_path);
  os << " rounds=" << flow.rounds;
  if (flow.second_round) {
    os << " second=" << to_string(flow.second_round->sensor) << ':'
       << sequence_key(flow.second_round->functions)
       << " mode=" << to_string(flow.second_round->mode);
  }
  return os.str();
}

}  // namespace rvspoof
