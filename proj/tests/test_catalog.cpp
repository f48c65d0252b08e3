#include "rvspoof/catalog.hpp"

#include <fstream>
#include <sstream>

#include "doctest.h"

using namespace rvspoof;

namespace {

const std::string kReferencePath = std::string(RVSPOOF_SOURCE_DIR) + "/data/catalog_reference.txt";

Catalog reference_catalog() { return load_catalog_file(kReferencePath); }

std::string sample_line() {
  return "FP1|Obstacle Missing|LiDAR|laser_projection|known|lidar-pla22|object|AtkPath4|$$$|S2|"
         "light|false|R2|active|agv,av|indoor,outdoor|AF3";
}

}  // namespace

TEST_CASE("reference catalog loads with the published totals") {
  Catalog catalog = reference_catalog();
  CHECK(catalog.size() == 103);

  CoverageReport report = coverage_report(catalog);
  CHECK(report.total == 103);
  CHECK(report.known == 26);
  CHECK(report.unexplored == 77);
  CHECK(report.per_class.at(FeasibilityClass::C3) == 36);
  CHECK(report.per_class.at(FeasibilityClass::C1) + report.per_class.at(FeasibilityClass::C2) ==
        41);
  CHECK(report.per_pattern_known.at(FlowPattern::FP3) == 2);
  CHECK(report.per_pattern_known.at(FlowPattern::FP14) == 3);
}

TEST_CASE("known records carry references, unexplored carry one class") {
  Catalog catalog = reference_catalog();
  for (const AttackVectorRecord& rec : catalog.records()) {
    if (rec.status == VectorStatus::known) {
      CHECK(!rec.reference_keys.empty());
      CHECK(!rec.feasibility.has_value());
    } else {
      CHECK(rec.reference_keys.empty());
      CHECK(rec.feasibility.has_value());
    }
    CHECK(!rec.flow_ids.empty());
  }
}

TEST_CASE("microphone record is a single cell joined to three flows") {
  Catalog catalog = reference_catalog();
  VectorQuery q;
  q.sensor = SensorKind::Microphone;
  auto records = query_vectors(catalog, q);
  REQUIRE(records.size() == 1);
  CHECK(records[0].attack_name == "Target Goal Generation");
  CHECK(records[0].flow_ids == std::vector<std::string>{"AF28", "AF29", "AF30"});
}

TEST_CASE("cited queries") {
  Catalog catalog = reference_catalog();

  VectorQuery ultrasonic;
  ultrasonic.sensor = SensorKind::Ultrasonic;
  auto us = query_vectors(catalog, ultrasonic);
  REQUIRE(us.size() == 2);
  CHECK(us[0].attack_name == "Obstacle Distance Altering");
  CHECK(us[0].pattern == FlowPattern::FP9);
  CHECK(us[1].attack_name == "Lateral Distance Altering");
  CHECK(us[1].pattern == FlowPattern::FP10);

  VectorQuery fp14_known;
  fp14_known.pattern = FlowPattern::FP14;
  fp14_known.status = VectorStatus::known;
  auto known14 = query_vectors(catalog, fp14_known);
  REQUIRE(known14.size() == 3);
  CHECK(known14[0].sensor == SensorKind::GPS);
  CHECK(known14[0].attack_name == "Target Blurring");
  CHECK(known14[1].sensor == SensorKind::IMU);
  CHECK(known14[1].attack_name == "Target Blurring");
  CHECK(known14[2].sensor == SensorKind::GPS);
  CHECK(known14[2].attack_name == "ROI Altering");

  VectorQuery path7;
  path7.attack_path = AttackPath::AtkPath7;
  auto roi = query_vectors(catalog, path7);
  CHECK(!roi.empty());
  FunctionGraph g = build_reference_graph();
  std::set<SensorKind> all;
  for (std::size_t i = 0; i < kSensorCount; ++i) all.insert(static_cast<SensorKind>(i));
  auto flows = enumerate_action_flows(g, all);
  for (const AttackVectorRecord& rec : roi) {
    CHECK(rec.attack_name == "ROI Altering");
    for (const std::string& id : rec.flow_ids) {
      auto it = std::find_if(flows.begin(), flows.end(),
                             [&](const ActionFlow& f) { return f.id == id; });
      REQUIRE(it != flows.end());
      REQUIRE(it->second_round.has_value());
      CHECK(it->second_round->sensor == SensorKind::Camera);
    }
  }

  VectorQuery c3;
  c3.feasibility = FeasibilityClass::C3;
  CHECK(query_vectors(catalog, c3).size() == 36);
}

TEST_CASE("coverage of an unfiltered query equals coverage of the catalog") {
  Catalog catalog = reference_catalog();
  Catalog requeried(query_vectors(catalog, VectorQuery{}));
  CHECK(coverage_report(requeried) == coverage_report(catalog));
}

TEST_CASE("duplicate cells are rejected") {
  std::stringstream in(sample_line() + "\n" + sample_line() + "\n");
  CHECK_THROWS_AS(load_catalog(in), DuplicateVectorError);
}

TEST_CASE("unknown flow references are rejected") {
  std::string line = sample_line();
  line.replace(line.rfind("AF3"), 3, "AF99");
  std::stringstream in(line);
  CHECK_THROWS_AS(load_catalog(in), UnknownFlowReferenceError);
}

TEST_CASE("empty file loads an empty catalog") {
  std::stringstream in("# nothing here\n\n");
  Catalog catalog = load_catalog(in);
  CHECK(catalog.size() == 0);
  CHECK(coverage_report(catalog).total == 0);
}

TEST_CASE("parse errors carry the offending line number") {
  std::stringstream in("# header\n" + sample_line() + "\nFP1|broken\n");
  try {
    load_catalog(in);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line_number == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("known records without references are rejected") {
  std::string line = sample_line();
  line.replace(line.find("lidar-pla22"), std::string("lidar-pla22").size(), "");
  std::stringstream in(line);
  CHECK_THROWS_AS(load_catalog(in), ParseError);
}

TEST_CASE("coverage table and report render the headline totals") {
  Catalog catalog = reference_catalog();
  CoverageReport report = coverage_report(catalog);
  std::string table = render_coverage_table(report);
  std::string machine = render_coverage_report(report);
  CHECK(table.find("total=103 known=26 unexplored=77") != std::string::npos);
  CHECK(machine.find("total=103 known=26 unexplored=77") != std::string::npos);
  CHECK(machine.find("class C3=36") != std::string::npos);
}
