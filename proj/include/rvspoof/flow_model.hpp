// Action-flow model of a robotic-vehicle pipeline: the 12-function graph,
// enumeration of sensor-to-controller flows, flow-pattern classification and
// attack-path assignment, including two-round compositions.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rvspoof {

enum class RoboticFunction : std::uint8_t {
  A1,  // object detection
  A2,  // segmentation
  A3,  // localization / SLAM
  A4,  // speech recognition
  A5,  // distance detection
  B,   // object tracking
  C1,  // environment prediction
  C2,  // goal planning
  D1,  // path routing
  D2,  // parking / landing planning
  E,   // motion planning
  F,   // motion controller (terminal)
};

inline constexpr std::size_t kFunctionCount = 12;

enum class SensorKind : std::uint8_t {
  GPS,
  LiDAR,
  Camera,
  IMU,
  Microphone,
  Ultrasonic,
  MMWRadar,
};

inline constexpr std::size_t kSensorCount = 7;

std::string_view to_string(RoboticFunction fn);
std::string_view to_string(SensorKind kind);
RoboticFunction function_from_string(std::string_view text);
SensorKind sensor_from_string(std::string_view text);

// Flow patterns FP1..FP13 are single-round sequence shapes; FP14 is the
// two-round shape (stabilization round followed by a detection round).
enum class FlowPattern : std::uint8_t {
  FP1 = 1, FP2, FP3, FP4, FP5, FP6, FP7,
  FP8, FP9, FP10, FP11, FP12, FP13, FP14,
};

enum class AttackPath : std::uint8_t {
  AtkPath1 = 1, AtkPath2, AtkPath3, AtkPath4,
  AtkPath5, AtkPath6, AtkPath7,
};

std::string_view to_string(FlowPattern pattern);
std::string_view to_string(AttackPath path);
FlowPattern pattern_from_string(std::string_view text);
AttackPath attack_path_from_string(std::string_view text);

// Rounds of an attack path: AtkPath6/7 are the only two-round paths.
int rounds_of(AttackPath path);

// Named attack types a pattern admits (the possible-attack rows of the
// vector matrix), used by the catalog to validate pattern/attack pairs.
const std::vector<std::string>& pattern_attacks(FlowPattern pattern);

struct UnknownSensorError : std::runtime_error {
  explicit UnknownSensorError(const std::string& what) : std::runtime_error(what) {}
};
struct UnclassifiableFlowError : std::runtime_error {
  explicit UnclassifiableFlowError(const std::string& what) : std::runtime_error(what) {}
};
struct CombinationUnsupportedError : std::runtime_error {
  explicit CombinationUnsupportedError(const std::string& what) : std::runtime_error(what) {}
};

// Directed acyclic function graph plus the sensor -> entry-function bindings.
class FunctionGraph {
 public:
  FunctionGraph() = default;

  void add_edge(RoboticFunction from, RoboticFunction to);
  void remove_edge(RoboticFunction from, RoboticFunction to);
  void bind_sensor(SensorKind kind, std::set<RoboticFunction> entries);

  bool has_edge(RoboticFunction from, RoboticFunction to) const;
  const std::vector<RoboticFunction>& successors(RoboticFunction from) const;
  std::size_t node_count() const { return kFunctionCount; }
  std::size_t edge_count() const;
  std::size_t out_degree(RoboticFunction fn) const;

  const std::map<SensorKind, std::set<RoboticFunction>>& sensor_bindings() const {
    return bindings_;
  }
  bool is_bound(SensorKind kind) const { return bindings_.count(kind) > 0; }

  bool is_acyclic() const;
  // True when every bound entry function has a path to the terminal F.
  bool entries_reach_terminal() const;

 private:
  std::array<std::vector<RoboticFunction>, kFunctionCount> adjacency_{};
  std::map<SensorKind, std::set<RoboticFunction>> bindings_;
};

enum class TwoRoundMode : std::uint8_t { blurring, roi };

std::string_view to_string(TwoRoundMode mode);

struct SecondRound {
  SensorKind sensor;
  std::vector<RoboticFunction> functions;
  TwoRoundMode mode;
};

// One end-to-end sensor-to-controller flow. `functions` is the first (or
// only) round; two-round flows carry the detection round in `second_round`.
struct ActionFlow {
  std::string id;  // AF1..AF44 on the reference configuration
  SensorKind sensor = SensorKind::GPS;
  std::vector<RoboticFunction> functions;
  FlowPattern pattern = FlowPattern::FP1;
  AttackPath attack_path = AttackPath::AtkPath1;
  int rounds = 1;
  std::optional<SecondRound> second_round;
};

// Reference graph: 12 functions, 19 edges, 7 sensor bindings.
FunctionGraph build_reference_graph();

// All simple entry->F paths for each requested sensor, plus every valid
// two-round composition whose sensors are both in `sensors`. On the
// reference configuration flows carry their canonical AF1..AF44 labels and
// come back sorted by label; elsewhere labels are generated in enumeration
// order (binding order, then path length, then lexicographic codes).
std::vector<ActionFlow> enumerate_action_flows(const FunctionGraph& graph,
                                               const std::set<SensorKind>& sensors);

FlowPattern classify_pattern(const ActionFlow& flow);

AttackPath assign_attack_path(const ActionFlow& flow);

// Composes a stabilization-round flow with a detection-round flow. Succeeds
// only for FP7 firsts (A3-F) and FP1 seconds on Camera/LiDAR; roi requires
// a Camera second. Everything else is CombinationUnsupported.
ActionFlow compose_two_round(const ActionFlow& first, const ActionFlow& second,
                             TwoRoundMode mode);

// `AF<id> <sensor> <fn>-<fn>-... pattern=FP<k> path=AtkPath<j> rounds=<n>`
// with ` second=<sensor>:<fns> mode=<mode>` appended for two-round flows.
std::string format_flow_line(const ActionFlow& flow);

}  // namespace rvspoof
