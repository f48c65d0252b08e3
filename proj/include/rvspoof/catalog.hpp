// Attack-vector catalog: the taxonomy records behind the vector matrix
// (one record per attack-row x spoofer-technique cell) with coverage
// aggregation and filtered queries.
#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rvspoof/flow_model.hpp"

namespace rvspoof {

enum class CostTier : std::uint8_t { low, mid, high };          // $, $$, $$$
enum class SizeClass : std::uint8_t { S1, S2 };                 // portable / not
enum class SignalType : std::uint8_t { satellite, light, sticker2d, object3d, sound, rf };
enum class RangeClass : std::uint8_t { R1, R2 };                // <5m / >=5m
enum class Exposure : std::uint8_t { active, passive };
enum class RvType : std::uint8_t { autonomous_vehicle, drone, automated_guided_vehicle };
enum class OperatingScenario : std::uint8_t { indoor, outdoor };
enum class GoalState : std::uint8_t { position, object, lane, velocity, mission_goal };
enum class VectorStatus : std::uint8_t { known, unexplored };
enum class FeasibilityClass : std::uint8_t { C1, C2, C3 };

struct SpooferProfile {
  CostTier cost_tier = CostTier::low;
  SizeClass size_class = SizeClass::S1;
  SignalType signal = SignalType::sound;
  bool recognizable = false;
};

struct OperationProfile {
  RangeClass range_class = RangeClass::R2;
  Exposure exposure = Exposure::active;
};

struct VictimProfile {
  std::set<RvType> rv_types;
  std::set<OperatingScenario> scenarios;
};

struct AttackVectorRecord {
  FlowPattern pattern = FlowPattern::FP1;
  std::string attack_name;
  SensorKind sensor = SensorKind::GPS;
  std::string technique;
  VectorStatus status = VectorStatus::unexplored;
  std::optional<FeasibilityClass> feasibility;  // set iff unexplored
  std::vector<std::string> reference_keys;      // set iff known
  GoalState goal_state = GoalState::object;
  AttackPath attack_path = AttackPath::AtkPath4;
  SpooferProfile spoofer;
  OperationProfile operation;
  VictimProfile victim;
  std::vector<std::string> flow_ids;  // joined action flows (AF labels)
};

struct ParseError : std::runtime_error {
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_number(line) {}
  int line_number;
};
struct DuplicateVectorError : std::runtime_error {
  explicit DuplicateVectorError(const std::string& what) : std::runtime_error(what) {}
};
struct UnknownFlowReferenceError : std::runtime_error {
  explicit UnknownFlowReferenceError(const std::string& what) : std::runtime_error(what) {}
};

class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<AttackVectorRecord> records);

  const std::vector<AttackVectorRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

 private:
  std::vector<AttackVectorRecord> records_;
};

struct CoverageReport {
  std::size_t total = 0;
  std::size_t known = 0;
  std::size_t unexplored = 0;
  std::map<FeasibilityClass, std::size_t> per_class;
  std::map<FlowPattern, std::size_t> per_pattern_total;
  std::map<FlowPattern, std::size_t> per_pattern_known;
  std::map<SensorKind, std::size_t> per_sensor_total;
  std::map<SensorKind, std::size_t> per_sensor_known;

  bool operator==(const CoverageReport&) const = default;
};

// All-optional filter; clauses are conjunctive.
struct VectorQuery {
  std::optional<SensorKind> sensor;
  std::optional<FlowPattern> pattern;
  std::optional<VectorStatus> status;
  std::optional<FeasibilityClass> feasibility;
  std::optional<AttackPath> attack_path;
  std::optional<GoalState> goal_state;
  std::optional<std::string> technique;
  std::optional<std::string> attack_name;
};

// Parses the line-per-record catalog format. Rejects duplicate
// (pattern, attack, sensor, technique) cells and unknown AF references.
Catalog load_catalog(std::istream& in);
Catalog load_catalog_file(const std::string& path);

CoverageReport coverage_report(const Catalog& catalog);

std::vector<AttackVectorRecord> query_vectors(const Catalog& catalog, const VectorQuery& query);

// Fixed-width human table and the line-oriented machine report.
std::string render_coverage_table(const CoverageReport& report);
std::string render_coverage_report(const CoverageReport& report);
std::string format_record_line(const AttackVectorRecord& record);

std::string_view to_string(CostTier tier);
std::string_view to_string(GoalState goal);
std::string_view to_string(FeasibilityClass cls);

}  // namespace rvspoof
