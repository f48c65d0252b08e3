#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rvspoof/sim_loop.hpp"
#include "rvspoof/sim_world.hpp"

using namespace rvspoof;

namespace {

const std::string kData = std::string(RVSPOOF_SOURCE_DIR) + "/data/";

SystemState straight_road_state() {
  SystemState truth;
  truth.operation.position = {0, 0};
  truth.operation.velocity = 10;
  truth.operation.heading = 0;
  return truth;
}

std::set<SensorKind> full_suite() {
  return {SensorKind::GPS, SensorKind::LiDAR, SensorKind::Camera, SensorKind::IMU,
          SensorKind::Microphone, SensorKind::Ultrasonic, SensorKind::MMWRadar};
}

Scenario scenario_named(const std::string& name) {
  return load_scenario(kData + "scenarios/" + name + ".scn");
}

SpoofPlan spoofs_named(const std::string& name) {
  return load_spoof_plan(kData + "spoofs/" + name + ".spf");
}

}  // namespace

TEST_CASE("render_frames geometry") {
  SystemState truth = straight_road_state();
  Obstacle obstacle;
  obstacle.id = 1;
  obstacle.position = {10, 0};
  obstacle.extent = 0.2;
  truth.environment.obstacles.push_back(obstacle);

  SensorFrames frames = render_frames(truth, full_suite(), 0);

  REQUIRE(frames.lidar.has_value());
  bool near_ten = false;
  for (const Vec2& p : frames.lidar->points) {
    if (std::abs(p.norm() - 10) < 0.2) near_ten = true;
  }
  CHECK(near_ten);

  REQUIRE(frames.gps.has_value());
  CHECK(frames.gps->position.x == 0);

  REQUIRE(frames.camera.has_value());
  REQUIRE(frames.camera->objects.size() == 1);
  CHECK(frames.camera->objects[0].distance == doctest::Approx(10));
  CHECK(frames.camera->objects[0].bearing == doctest::Approx(0));

  REQUIRE(frames.radar.has_value());
  REQUIRE(frames.radar->targets.size() == 1);
  CHECK(frames.radar->targets[0].radial_speed == doctest::Approx(10));  // closing at RV speed
}

TEST_CASE("render_frames: empty environment and visibility cones") {
  SystemState truth = straight_road_state();
  SensorFrames empty = render_frames(truth, full_suite(), 0);
  CHECK(empty.lidar->points.empty());
  CHECK(!empty.ultrasonic->distance.has_value());

  Obstacle behind;
  behind.id = 2;
  behind.position = {-15, 0};
  behind.extent = 1;
  truth.environment.obstacles.push_back(behind);
  SensorFrames frames = render_frames(truth, full_suite(), 0);
  CHECK(frames.camera->objects.empty());      // outside the forward field of view
  CHECK(!frames.ultrasonic->distance.has_value());
  CHECK(!frames.lidar->points.empty());        // lidar sweeps the full circle
}

TEST_CASE("render_frames is pure") {
  SystemState truth = straight_road_state();
  Obstacle obstacle;
  obstacle.id = 1;
  obstacle.position = {12, 3};
  obstacle.extent = 2;
  truth.environment.obstacles.push_back(obstacle);

  SensorFrames a = render_frames(truth, full_suite(), 7);
  SensorFrames b = render_frames(truth, full_suite(), 7);
  REQUIRE(a.lidar->points.size() == b.lidar->points.size());
  for (std::size_t i = 0; i < a.lidar->points.size(); ++i) {
    CHECK(a.lidar->points[i].x == b.lidar->points[i].x);
    CHECK(a.lidar->points[i].y == b.lidar->points[i].y);
  }
}

TEST_CASE("apply_spoofs windows, ordering, and composition") {
  SystemState truth = straight_road_state();
  truth.operation.position = {5, 5};
  SensorFrames frames = render_frames(truth, {SensorKind::GPS, SensorKind::LiDAR}, 0);

  SpoofSpec shift;
  shift.sensor = SensorKind::GPS;
  shift.t_start = 1;
  shift.t_end = 2;
  shift.transform = GpsShift{{1, 0}, {}};
  shift.label = "gps_shift";

  SensorFrames shifted = apply_spoofs(frames, {shift}, 1.5);
  CHECK(shifted.gps->position.x == doctest::Approx(6));
  CHECK(shifted.gps->position.y == doctest::Approx(5));

  SensorFrames outside = apply_spoofs(frames, {shift}, 5.0);
  CHECK(outside.gps->position.x == doctest::Approx(5));

  SpoofSpec inject;
  inject.sensor = SensorKind::LiDAR;
  inject.t_start = 0;
  inject.t_end = 10;
  LidarInject payload;
  for (int i = 0; i < 40; ++i) payload.points.push_back({10.0 + 0.01 * i, 0});
  inject.transform = payload;
  SensorFrames with_phantom = apply_spoofs(frames, {inject}, 1);
  CHECK(with_phantom.lidar->points.size() == frames.lidar->points.size() + 40);

  // GpsShift(a) then GpsShift(b) acts like GpsShift(a+b).
  SpoofSpec a = shift;
  a.transform = GpsShift{{1, 2}, {}};
  SpoofSpec b = shift;
  b.transform = GpsShift{{3, -1}, {}};
  SpoofSpec combined = shift;
  combined.transform = GpsShift{{4, 1}, {}};
  SensorFrames ab = apply_spoofs(frames, {a, b}, 1.5);
  SensorFrames once = apply_spoofs(frames, {combined}, 1.5);
  CHECK(ab.gps->position.x == doctest::Approx(once.gps->position.x));
  CHECK(ab.gps->position.y == doctest::Approx(once.gps->position.y));

  // Spoofing a sensor that is absent from the suite is an error.
  SensorFrames no_imu = render_frames(truth, {SensorKind::GPS}, 0);
  SpoofSpec bias;
  bias.sensor = SensorKind::IMU;
  bias.t_start = 0;
  bias.t_end = 10;
  bias.transform = ImuBias{0, 1};
  CHECK_THROWS_AS(apply_spoofs(no_imu, {bias}, 1), IncompatibleTransformError);
}

TEST_CASE("perceive: detection, localization pass-through, and erasure") {
  SimParams params;
  EstimatedState prev;
  prev.position = {0, 0};
  prev.velocity = 10;
  prev.heading = 0;

  SystemState truth = straight_road_state();
  Obstacle obstacle;
  obstacle.id = 1;
  obstacle.position = {10, 0};
  obstacle.extent = 1;
  truth.environment.obstacles.push_back(obstacle);

  SensorFrames frames = render_frames(truth, {SensorKind::GPS, SensorKind::LiDAR,
                                              SensorKind::IMU},
                                      0);

  SUBCASE("clean frames detect the obstacle ahead with caution priority") {
    EstimatedState est = perceive(frames, LocalizationMode::gps, prev, params);
    REQUIRE(est.detected_objects.size() == 1);
    CHECK(est.detected_objects[0].position.x == doctest::Approx(9.5).epsilon(0.1));
    CHECK(std::abs(est.detected_objects[0].position.y) < 0.5);
    REQUIRE(est.tracks.size() == 1);
    CHECK(est.priorities.at(est.tracks[0].id) == Priority::caution);
  }

  SUBCASE("gps offset passes straight into the estimate") {
    SpoofSpec shift;
    shift.sensor = SensorKind::GPS;
    shift.t_start = 0;
    shift.t_end = 10;
    shift.transform = GpsShift{{3, -2}, {}};
    SensorFrames spoofed = apply_spoofs(frames, {shift}, 1);
    EstimatedState est = perceive(spoofed, LocalizationMode::gps, prev, params);
    CHECK(est.position.x == doctest::Approx(3));
    CHECK(est.position.y == doctest::Approx(-2));
  }

  SUBCASE("erasing the only obstacle empties the detections") {
    SpoofSpec erase;
    erase.sensor = SensorKind::LiDAR;
    erase.t_start = 0;
    erase.t_end = 10;
    erase.transform = LidarErase{};
    SensorFrames spoofed = apply_spoofs(frames, {erase}, 1);
    EstimatedState est = perceive(spoofed, LocalizationMode::gps, prev, params);
    CHECK(est.detected_objects.empty());
  }
}

TEST_CASE("plan: braking, landing, and the clear-road baseline") {
  SimParams params;
  OccupancyGrid grid({}, {-50, -50}, {150, 50});
  LongTermPolicy long_term;
  long_term.destination = {80, 0};

  EstimatedState est;
  est.position = {0, 0};
  est.heading = 0;
  est.velocity = 0;

  SUBCASE("caution object at 3 m forces a hard brake") {
    Track track;
    track.id = 1;
    track.position = {3, 0};
    est.tracks.push_back(track);
    est.priorities[1] = Priority::caution;
    auto [lt, policy] = plan(est, long_term, grid, params);
    CHECK(policy.discrete == DiscreteAction::hard_brake);
    CHECK(policy.target_speed == 0);
  }

  SUBCASE("estimated position inside a no-fly zone lands") {
    OccupancyGrid zoned({}, {-50, -50}, {150, 50});
    zoned.set_no_fly_zones({RectZone{{-5, -5}, {5, 5}}});
    auto [lt, policy] = plan(est, long_term, zoned, params);
    CHECK(policy.discrete == DiscreteAction::land);
  }

  SUBCASE("clear road cruises at nominal speed") {
    auto [lt, policy] = plan(est, long_term, grid, params);
    CHECK(policy.target_speed == doctest::Approx(params.v_nom));
    CHECK(policy.discrete == DiscreteAction::none);
  }

  SUBCASE("walled-off destination raises NoRoute") {
    std::vector<RectZone> walls{{{70, -10}, {90, -1}},
                                {{70, 1}, {90, 10}},
                                {{70, -10}, {72, 10}},
                                {{88, -10}, {90, 10}}};
    OccupancyGrid blocked(walls, {-50, -50}, {150, 50});
    CHECK_THROWS_AS(plan(est, long_term, blocked, params), NoRouteError);
  }
}

TEST_CASE("control: setpoint tracking and saturation") {
  SimParams params;
  EstimatedState est;
  est.velocity = 10;
  est.heading = 0;

  InstantPolicy cruising;
  cruising.target_speed = 10;
  cruising.steer_rate = 0;
  ControlOutput quiet = control(cruising, est, params);
  CHECK(quiet.linear_accel == doctest::Approx(0));
  CHECK(quiet.yaw_rate == doctest::Approx(0));

  InstantPolicy braking;
  braking.discrete = DiscreteAction::hard_brake;
  ControlOutput full = control(braking, est, params);
  CHECK(full.linear_accel == doctest::Approx(-params.a_max));

  InstantPolicy hard_turn;
  hard_turn.target_speed = 10;
  hard_turn.steer_rate = 9;
  ControlOutput sat = control(hard_turn, est, params);
  CHECK(sat.yaw_rate == doctest::Approx(params.omega_max));
}

TEST_CASE("no-attack soundness over every shipped scenario") {
  for (const char* name :
       {"atkpath1_destabilize", "atkpath2_forced_landing", "atkpath3_wrong_destination",
        "atkpath4_phantom_brake", "atkpath5_voice_mission", "atkpath6_blur_then_miss",
        "atkpath7_roi_red_light"}) {
    Scenario scenario = scenario_named(name);
    SimulationResult clean = run_scenario(scenario, SpoofPlan{}, 1);
    CHECK_MESSAGE(clean.report.outcome == HazardOutcome::none, name);
    CHECK(!clean.report.realized_path.has_value());
  }
}

TEST_CASE("runs are deterministic") {
  Scenario scenario = scenario_named("atkpath4_phantom_brake");
  SpoofPlan plan = spoofs_named("atkpath4_phantom_brake");
  SimulationResult a = run_scenario(scenario, plan, 3);
  SimulationResult b = run_scenario(scenario, plan, 3);
  CHECK(trace_hash(a.trace) == trace_hash(b.trace));
  CHECK(a.report.outcome == b.report.outcome);
}

TEST_CASE("attacker boundary: truth diverges only after controls diverge") {
  Scenario scenario = scenario_named("atkpath3_wrong_destination");
  SpoofPlan plan = spoofs_named("atkpath3_wrong_destination");
  SimulationResult attacked = run_scenario(scenario, plan, 1);
  SimulationResult clean = run_scenario(scenario, SpoofPlan{}, 1);

  REQUIRE(attacked.trace.steps.size() == clean.trace.steps.size());
  bool controls_diverged = false;
  for (std::size_t i = 0; i < attacked.trace.steps.size(); ++i) {
    const TraceStep& a = attacked.trace.steps[i];
    const TraceStep& c = clean.trace.steps[i];
    if (!controls_diverged) {
      // Up to (and including) the first step with differing controls, the
      // ground truth streams must agree: spoofs touch z_t only.
      CHECK(a.truth.position.x == c.truth.position.x);
      CHECK(a.truth.position.y == c.truth.position.y);
      REQUIRE(a.obstacle_positions.size() == c.obstacle_positions.size());
      for (std::size_t k = 0; k < a.obstacle_positions.size(); ++k) {
        CHECK(a.obstacle_positions[k].x == c.obstacle_positions[k].x);
      }
    }
    if (a.control.linear_accel != c.control.linear_accel ||
        a.control.yaw_rate != c.control.yaw_rate) {
      controls_diverged = true;
    }
  }
  CHECK(controls_diverged);  // the drift spoof must eventually act
}

TEST_CASE("safety-rule monotonicity: shrinking d_safe never adds baseline collisions") {
  Scenario scenario = scenario_named("atkpath6_blur_then_miss");  // real obstacle ahead
  std::size_t previous_brakes = std::numeric_limits<std::size_t>::max();
  for (double d_safe : {8.0, 2.0, 0.5}) {
    Scenario variant = scenario;
    variant.params["d_safe"] = d_safe;
    SimulationResult clean = run_scenario(variant, SpoofPlan{}, 1);
    CHECK(clean.report.outcome == HazardOutcome::none);
    std::size_t brakes = 0;
    bool collided = false;
    for (const TraceStep& step : clean.trace.steps) {
      if (step.control.discrete == DiscreteAction::hard_brake) ++brakes;
      for (std::size_t k = 0; k < step.obstacle_positions.size(); ++k) {
        const double radius = variant.environment.obstacles[k].extent / 2;
        if ((step.obstacle_positions[k] - step.truth.position).norm() < radius + 0.3) {
          collided = true;
        }
      }
    }
    CHECK(!collided);
    CHECK(brakes <= previous_brakes);
    previous_brakes = brakes;
  }
}

TEST_CASE("slam hook can override the position estimate") {
  Scenario scenario = scenario_named("atkpath3_wrong_destination");
  bool called = false;
  SlamHook hook = [&](const EstimatedState&, double t) -> std::optional<Vec2> {
    called = true;
    if (t > 2.0 && t < 2.2) return Vec2{0, 0};  // relocalize back to the start
    return std::nullopt;
  };
  SimulationResult result = run_scenario(scenario, SpoofPlan{}, 1, hook);
  CHECK(called);
  bool snapped = false;
  for (const TraceStep& step : result.trace.steps) {
    if (step.time > 2.0 && step.time < 2.2 && step.est_position.norm() < 1e-9) snapped = true;
  }
  CHECK(snapped);
}

TEST_CASE("trace serialization matches the shipped golden trace") {
  Scenario scenario = scenario_named("atkpath4_phantom_brake");
  SpoofPlan plan = spoofs_named("atkpath4_phantom_brake");
  SimulationResult result = run_scenario(scenario, plan, 1);
  std::ostringstream out;
  write_trace(out, result.trace, result.report);
  const std::string text = out.str();
  CHECK(text.find("# rvspoof trace v1") == 0);
  CHECK(text.find("outcome=emergency_stop") != std::string::npos);
  CHECK(text.find("path=AtkPath4") != std::string::npos);
  CHECK(text.find("trace_hash=") != std::string::npos);

  std::ifstream golden_file(kData + "golden/atkpath4_trace.txt");
  REQUIRE(golden_file.good());
  std::stringstream golden;
  golden << golden_file.rdbuf();
  CHECK(text == golden.str());
}

TEST_CASE("scenario parser rejects malformed input") {
  const std::string bad = kData + "scenarios/does_not_exist.scn";
  CHECK_THROWS(load_scenario(bad));
}
