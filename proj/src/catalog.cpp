#include "rvspoof/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <tuple>

namespace rvspoof {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = text.find(sep, pos);
    if (next == std::string::npos) {
      parts.push_back(text.substr(pos));
      break;
    }
    parts.push_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

std::vector<std::string> split_list(const std::string& text) {
  if (text.empty()) return {};
  return split(text, ',');
}

CostTier parse_cost(const std::string& s, int line) {
  if (s == "$") return CostTier::low;
  if (s == "$$") return CostTier::mid;
  if (s == "$$$") return CostTier::high;
  throw ParseError(line, "bad cost tier '" + s + "'");
}

SignalType parse_signal(const std::string& s, int line) {
  if (s == "satellite") return SignalType::satellite;
  if (s == "light") return SignalType::light;
  if (s == "sticker2d") return SignalType::sticker2d;
  if (s == "object3d") return SignalType::object3d;
  if (s == "sound") return SignalType::sound;
  if (s == "rf") return SignalType::rf;
  throw ParseError(line, "bad signal type '" + s + "'");
}

GoalState parse_goal(const std::string& s, int line) {
  if (s == "position") return GoalState::position;
  if (s == "object") return GoalState::object;
  if (s == "lane") return GoalState::lane;
  if (s == "velocity") return GoalState::velocity;
  if (s == "mission_goal") return GoalState::mission_goal;
  throw ParseError(line, "bad goal state '" + s + "'");
}

RvType parse_rv_type(const std::string& s, int line) {
  if (s == "av") return RvType::autonomous_vehicle;
  if (s == "drone") return RvType::drone;
  if (s == "agv") return RvType::automated_guided_vehicle;
  throw ParseError(line, "bad rv type '" + s + "'");
}

// Valid AF labels on the reference configuration.
const std::set<std::string>& reference_flow_ids() {
  static const std::set<std::string> ids = [] {
    std::set<std::string> out;
    auto graph = build_reference_graph();
    std::set<SensorKind> all;
    for (std::size_t i = 0; i < kSensorCount; ++i) all.insert(static_cast<SensorKind>(i));
    for (const ActionFlow& flow : enumerate_action_flows(graph, all)) out.insert(flow.id);
    return out;
  }();
  return ids;
}

}  // namespace

std::string_view to_string(CostTier tier) {
  switch (tier) {
    case CostTier::low: return "$";
    case CostTier::mid: return "$$";
    case CostTier::high: return "$$$";
  }
  return "?";
}

std::string_view to_string(GoalState goal) {
  switch (goal) {
    case GoalState::position: return "position";
    case GoalState::object: return "object";
    case GoalState::lane: return "lane";
    case GoalState::velocity: return "velocity";
    case GoalState::mission_goal: return "mission_goal";
  }
  return "?";
}

std::string_view to_string(FeasibilityClass cls) {
  switch (cls) {
    case FeasibilityClass::C1: return "C1";
    case FeasibilityClass::C2: return "C2";
    case FeasibilityClass::C3: return "C3";
  }
  return "?";
}

Catalog::Catalog(std::vector<AttackVectorRecord> records) : records_(std::move(records)) {}

Catalog load_catalog(std::istream& in) {
  std::vector<AttackVectorRecord> records;
  std::set<std::tuple<FlowPattern, std::string, SensorKind, std::string>> seen;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t"));
    if (trimmed.empty() || trimmed[0] == '#') continue;

    auto fields = split(trimmed, '|');
    if (fields.size() != 17) {
      throw ParseError(line_number, "expected 17 fields, got " + std::to_string(fields.size()));
    }

    AttackVectorRecord rec;
    try {
      rec.pattern = pattern_from_string(fields[0]);
      rec.attack_name = fields[1];
      rec.sensor = sensor_from_string(fields[2]);
      rec.technique = fields[3];
      rec.attack_path = attack_path_from_string(fields[7]);
    } catch (const std::exception& e) {
      throw ParseError(line_number, e.what());
    }

    if (fields[4] == "known") {
      rec.status = VectorStatus::known;
      rec.reference_keys = split_list(fields[5]);
      if (rec.reference_keys.empty()) {
        throw ParseError(line_number, "known record must carry at least one reference key");
      }
    } else if (fields[4] == "unexplored") {
      rec.status = VectorStatus::unexplored;
      if (fields[5] == "C1") rec.feasibility = FeasibilityClass::C1;
      else if (fields[5] == "C2") rec.feasibility = FeasibilityClass::C2;
      else if (fields[5] == "C3") rec.feasibility = FeasibilityClass::C3;
      else throw ParseError(line_number, "unexplored record needs exactly one class C1|C2|C3");
    } else {
      throw ParseError(line_number, "bad status '" + fields[4] + "'");
    }

    rec.goal_state = parse_goal(fields[6], line_number);
    rec.spoofer.cost_tier = parse_cost(fields[8], line_number);
    if (fields[9] == "S1") rec.spoofer.size_class = SizeClass::S1;
    else if (fields[9] == "S2") rec.spoofer.size_class = SizeClass::S2;
    else throw ParseError(line_number, "bad size class '" + fields[9] + "'");
    rec.spoofer.signal = parse_signal(fields[10], line_number);
    if (fields[11] == "true") rec.spoofer.recognizable = true;
    else if (fields[11] == "false") rec.spoofer.recognizable = false;
    else throw ParseError(line_number, "bad recognizability '" + fields[11] + "'");
    if (fields[12] == "R1") rec.operation.range_class = RangeClass::R1;
    else if (fields[12] == "R2") rec.operation.range_class = RangeClass::R2;
    else throw ParseError(line_number, "bad range class '" + fields[12] + "'");
    if (fields[13] == "active") rec.operation.exposure = Exposure::active;
    else if (fields[13] == "passive") rec.operation.exposure = Exposure::passive;
    else throw ParseError(line_number, "bad exposure '" + fields[13] + "'");

    for (const std::string& rv : split_list(fields[14])) {
      rec.victim.rv_types.insert(parse_rv_type(rv, line_number));
    }
    for (const std::string& sc : split_list(fields[15])) {
      if (sc == "indoor") rec.victim.scenarios.insert(OperatingScenario::indoor);
      else if (sc == "outdoor") rec.victim.scenarios.insert(OperatingScenario::outdoor);
      else throw ParseError(line_number, "bad scenario '" + sc + "'");
    }
    if (rec.victim.rv_types.empty() || rec.victim.scenarios.empty()) {
      throw ParseError(line_number, "victim rv_types and scenarios must be non-empty");
    }

    rec.flow_ids = split_list(fields[16]);
    if (rec.flow_ids.empty()) {
      throw ParseError(line_number, "record must join at least one action flow");
    }
    for (const std::string& id : rec.flow_ids) {
      if (!reference_flow_ids().count(id)) {
        throw UnknownFlowReferenceError("line " + std::to_string(line_number) +
                                        ": unknown action flow '" + id + "'");
      }
    }

    auto key = std::make_tuple(rec.pattern, rec.attack_name, rec.sensor, rec.technique);
    if (!seen.insert(key).second) {
      throw DuplicateVectorError("line " + std::to_string(line_number) + ": duplicate vector (" +
                                 std::string(to_string(rec.pattern)) + ", " + rec.attack_name +
                                 ", " + std::string(to_string(rec.sensor)) + ", " +
                                 rec.technique + ")");
    }
    records.push_back(std::move(rec));
  }
  return Catalog(std::move(records));
}

Catalog load_catalog_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open catalog file: " + path);
  return load_catalog(in);
}

CoverageReport coverage_report(const Catalog& catalog) {
  CoverageReport report;
  for (const AttackVectorRecord& rec : catalog.records()) {
    ++report.total;
    ++report.per_pattern_total[rec.pattern];
    ++report.per_sensor_total[rec.sensor];
    if (rec.status == VectorStatus::known) {
      ++report.known;
      ++report.per_pattern_known[rec.pattern];
      ++report.per_sensor_known[rec.sensor];
    } else {
      ++report.unexplored;
      ++report.per_class[*rec.feasibility];
    }
  }
  return report;
}

std::vector<AttackVectorRecord> query_vectors(const Catalog& catalog, const VectorQuery& query) {
  std::vector<AttackVectorRecord> out;
  for (const AttackVectorRecord& rec : catalog.records()) {
    if (query.sensor && rec.sensor != *query.sensor) continue;
    if (query.pattern && rec.pattern != *query.pattern) continue;
    if (query.status && rec.status != *query.status) continue;
    if (query.feasibility && rec.feasibility != query.feasibility) continue;
    if (query.attack_path && rec.attack_path != *query.attack_path) continue;
    if (query.goal_state && rec.goal_state != *query.goal_state) continue;
    if (query.technique && rec.technique != *query.technique) continue;
    if (query.attack_name && rec.attack_name != *query.attack_name) continue;
    out.push_back(rec);
  }
  return out;
}

std::string render_coverage_report(const CoverageReport& report) {
  std::ostringstream os;
  os << "total=" << report.total << " known=" << report.known
     << " unexplored=" << report.unexplored << '\n';
  for (auto cls : {FeasibilityClass::C1, FeasibilityClass::C2, FeasibilityClass::C3}) {
    auto it = report.per_class.find(cls);
    os << "class " << to_string(cls) << '=' << (it == report.per_class.end() ? 0 : it->second)
       << '\n';
  }
  for (const auto& [pattern, total] : report.per_pattern_total) {
    auto known_it = report.per_pattern_known.find(pattern);
    os << "pattern " << to_string(pattern) << " total=" << total
       << " known=" << (known_it == report.per_pattern_known.end() ? 0 : known_it->second)
       << '\n';
  }
  for (const auto& [sensor, total] : report.per_sensor_total) {
    auto known_it = report.per_sensor_known.find(sensor);
    os << "sensor " << to_string(sensor) << " total=" << total
       << " known=" << (known_it == report.per_sensor_known.end() ? 0 : known_it->second)
       << '\n';
  }
  return os.str();
}

std::string render_coverage_table(const CoverageReport& report) {
  std::ostringstream os;
  os << "total=" << report.total << " known=" << report.known
     << " unexplored=" << report.unexplored << '\n';
  os << std::left << std::setw(10) << "pattern" << std::right << std::setw(8) << "total"
     << std::setw(8) << "known" << std::setw(12) << "unexplored" << '\n';
  for (const auto& [pattern, total] : report.per_pattern_total) {
    auto known_it = report.per_pattern_known.find(pattern);
    std::size_t known = known_it == report.per_pattern_known.end() ? 0 : known_it->second;
    os << std::left << std::setw(10) << to_string(pattern) << std::right << std::setw(8) << total
       << std::setw(8) << known << std::setw(12) << (total - known) << '\n';
  }
  os << std::left << std::setw(10) << "sensor" << std::right << std::setw(8) << "total"
     << std::setw(8) << "known" << std::setw(12) << "unexplored" << '\n';
  for (const auto& [sensor, total] : report.per_sensor_total) {
    auto known_it = report.per_sensor_known.find(sensor);
    std::size_t known = known_it == report.per_sensor_known.end() ? 0 : known_it->second;
    os << std::left << std::setw(10) << to_string(sensor) << std::right << std::setw(8) << total
       << std::setw(8) << known << std::setw(12) << (total - known) << '\n';
  }
  os << "unexplored by class:";
  for (auto cls : {FeasibilityClass::C1, FeasibilityClass::C2, FeasibilityClass::C3}) {
    auto it = report.per_class.find(cls);
    os << ' ' << to_string(cls) << '=' << (it == report.per_class.end() ? 0 : it->second);
  }
  os << '\n';
  return os.str();
}

std::string format_record_line(const AttackVectorRecord& record) {
  std::ostringstream os;
  os << to_string(record.pattern) << '|' << record.attack_name << '|'
     << to_string(record.sensor) << '|' << record.technique << '|'
     << (record.status == VectorStatus::known ? "known" : "unexplored") << '|';
  if (record.status == VectorStatus::known) {
    for (std::size_t i = 0; i < record.reference_keys.size(); ++i) {
      if (i) os << ',';
      os << record.reference_keys[i];
    }
  } else {
    os << to_string(*record.feasibility);
  }
  os << '|' << to_string(record.goal_state) << '|' << to_string(record.attack_path);
  os << '|';
  for (std::size_t i = 0; i < record.flow_ids.size(); ++i) {
    if (i) os << ',';
    os << record.flow_ids[i];
  }
  return os.str();
}

}  // namespace rvspoof
