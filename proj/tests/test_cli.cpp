#include "rvspoof/cli.hpp"

#include <fstream>
#include <sstream>

#include "doctest.h"

namespace {

const std::string kData = std::string(RVSPOOF_SOURCE_DIR) + "/data/";

struct CliRun {
  int exit_code;
  std::string out;
  std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = rvspoof::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("flows: all sensors emit 44 lines matching the golden file") {
  CliRun run = cli({"flows", "--sensors", "all"});
  CHECK(run.exit_code == 0);
  CHECK(count_lines(run.out) == 44);

  std::ifstream golden(kData + "reference_flows.txt");
  std::stringstream expected;
  expected << golden.rdbuf();
  CHECK(run.out == expected.str());
}

TEST_CASE("flows: ultrasonic filter and bad sensor names") {
  CliRun ultrasonic = cli({"flows", "--sensors", "ultrasonic"});
  CHECK(ultrasonic.exit_code == 0);
  CHECK(count_lines(ultrasonic.out) == 2);

  CliRun bogus = cli({"flows", "--sensors", "bogus"});
  CHECK(bogus.exit_code == 2);
  CHECK(bogus.err.find("bogus") != std::string::npos);
}

TEST_CASE("catalog: coverage summary and class filter") {
  const std::string file = kData + "catalog_reference.txt";
  CliRun summary = cli({"catalog", "--file", file});
  CHECK(summary.exit_code == 0);
  CHECK(summary.out.find("total=103 known=26 unexplored=77") != std::string::npos);

  CliRun c3 = cli({"catalog", "--file", file, "--class", "C3"});
  CHECK(c3.exit_code == 0);
  CHECK(c3.out.find("matched=36") != std::string::npos);
  CHECK(count_lines(c3.out) == 37);  // 36 records plus the matched= line
}

TEST_CASE("catalog: parse failures carry the line number and exit 2") {
  const std::string broken = "/tmp/rvspoof_broken_catalog.txt";
  {
    std::ofstream out(broken);
    out << "# header\n";
    for (int i = 0; i < 5; ++i) out << "\n";
    out << "FP1|broken line\n";  // line 7
  }
  CliRun run = cli({"catalog", "--file", broken});
  CHECK(run.exit_code == 2);
  CHECK(run.err.find("line 7") != std::string::npos);
}

TEST_CASE("sim: baseline trailer and attack trailer") {
  const std::string scenario = kData + "scenarios/atkpath4_phantom_brake.scn";
  CliRun baseline = cli({"sim", "--scenario", scenario, "--out", "/tmp/rvspoof_trace.txt"});
  CHECK(baseline.exit_code == 0);
  CHECK(baseline.out.find("outcome=none") != std::string::npos);

  CliRun attack = cli({"sim", "--scenario", scenario, "--spoofs",
                       kData + "spoofs/atkpath4_phantom_brake.spf", "--out",
                       "/tmp/rvspoof_trace_attack.txt"});
  CHECK(attack.exit_code == 0);
  CHECK(attack.out.find("outcome=emergency_stop path=AtkPath4") != std::string::npos);

  CliRun two_round = cli({"sim", "--scenario", kData + "scenarios/atkpath6_blur_then_miss.scn",
                          "--spoofs", kData + "spoofs/atkpath6_blur_then_miss.spf"});
  CHECK(two_round.exit_code == 0);
  CHECK(two_round.out.find("path=AtkPath6") != std::string::npos);
}

TEST_CASE("sim: missing scenario file exits 2") {
  CliRun run = cli({"sim", "--scenario", "/tmp/no_such_scenario.scn"});
  CHECK(run.exit_code == 2);
}

TEST_CASE("sim: unreachable destination exits 1") {
  const std::string walled = "/tmp/rvspoof_walled.scn";
  {
    std::ofstream out(walled);
    out << "name walled\nrv car\ndt 0.1\nsteps 20\nstart 0 0 0 5\ndestination 40 0\n"
        << "sensors GPS,IMU\nmode gps\n"
        << "wall 30 -50 32 50\nwall 48 -50 50 50\nwall 30 -50 50 -48\nwall 30 48 50 50\n";
  }
  CliRun run = cli({"sim", "--scenario", walled});
  CHECK(run.exit_code == 1);
  CHECK(run.err.find("route") != std::string::npos);
}

TEST_CASE("optimize: oracle comparison line on the reference scene") {
  CliRun run = cli({"optimize", "--scene", kData + "scenes/placement_reference.txt", "--oracle",
                    "--seed", "1", "--out", "/tmp/rvspoof_opt.txt"});
  CHECK(run.exit_code == 0);
  CHECK(run.out.find("optimizer/oracle >= 0.90") != std::string::npos);

  std::ifstream result("/tmp/rvspoof_opt.txt");
  std::stringstream text;
  text << result.rdbuf();
  CHECK(text.str().find("placement ") != std::string::npos);
  CHECK(text.str().find("history ") != std::string::npos);
  CHECK(text.str().find("oracle_loss ") != std::string::npos);
}

TEST_CASE("optimize: missing scene exits 2") {
  CliRun run = cli({"optimize", "--scene", "/tmp/no_such_scene.txt"});
  CHECK(run.exit_code == 2);
}

TEST_CASE("loopclosure: reference fixture flips from none to closure") {
  CliRun run = cli({"loopclosure", "--fixture", kData + "fixtures/loopclosure_reference.txt",
                    "--budget", "40"});
  CHECK(run.exit_code == 0);
  CHECK(run.out.find("before=none after=closure injected=28") != std::string::npos);

  CliRun starved = cli({"loopclosure", "--fixture",
                        kData + "fixtures/loopclosure_reference.txt", "--budget", "5"});
  CHECK(starved.exit_code == 1);
  CHECK(starved.err.find("budget") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  CliRun run = cli({"catalog"});
  CHECK(run.exit_code == 2);
  CliRun unknown = cli({"frobnicate"});
  CHECK(unknown.exit_code == 2);
}
