#include "rvspoof/sim_world.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace rvspoof {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Distance along a ray (origin, unit direction) to a circle, or nullopt.
std::optional<double> ray_circle(const Vec2& origin, const Vec2& dir, const Vec2& center,
                                 double radius) {
  const Vec2 oc = origin - center;
  const double b = oc.dot(dir);
  const double c = oc.dot(oc) - radius * radius;
  const double disc = b * b - c;
  if (disc < 0) return std::nullopt;
  const double root = std::sqrt(disc);
  const double t0 = -b - root;
  if (t0 >= 0) return t0;
  const double t1 = -b + root;
  if (t1 >= 0) return t1;
  return std::nullopt;
}

double bearing_to(const OperationState& op, const Vec2& point) {
  const Vec2 d = point - op.position;
  return wrap_heading(std::atan2(d.y, d.x) - op.heading);
}

}  // namespace

double wrap_heading(double a) {
  while (a <= -kPi) a += 2 * kPi;
  while (a > kPi) a -= 2 * kPi;
  return a;
}

std::string_view to_string(ObstacleClass cls) {
  switch (cls) {
    case ObstacleClass::vehicle: return "vehicle";
    case ObstacleClass::pedestrian: return "pedestrian";
    case ObstacleClass::drone: return "drone";
    case ObstacleClass::wall: return "wall";
  }
  return "?";
}

ObstacleClass obstacle_class_from_string(std::string_view text) {
  if (text == "vehicle") return ObstacleClass::vehicle;
  if (text == "pedestrian") return ObstacleClass::pedestrian;
  if (text == "drone") return ObstacleClass::drone;
  if (text == "wall") return ObstacleClass::wall;
  throw std::invalid_argument("unknown obstacle class: " + std::string(text));
}

bool SensorFrames::has(SensorKind kind) const {
  switch (kind) {
    case SensorKind::GPS: return gps.has_value();
    case SensorKind::LiDAR: return lidar.has_value();
    case SensorKind::Camera: return camera.has_value();
    case SensorKind::IMU: return imu.has_value();
    case SensorKind::Microphone: return mic.has_value();
    case SensorKind::Ultrasonic: return ultrasonic.has_value();
    case SensorKind::MMWRadar: return radar.has_value();
  }
  return false;
}

SensorFrames render_frames(const SystemState& truth, const std::set<SensorKind>& suite,
                           std::uint64_t /*seed*/, const SensorRigConfig& rig) {
  SensorFrames frames;
  const OperationState& op = truth.operation;
  const EnvironmentState& env = truth.environment;

  if (suite.count(SensorKind::GPS)) {
    frames.gps = GpsFrame{op.position};
  }

  if (suite.count(SensorKind::LiDAR)) {
    LidarFrame lidar;
    lidar.beam_count = rig.lidar_beams;
    lidar.max_range = rig.lidar_range;
    for (int k = 0; k < rig.lidar_beams; ++k) {
      const double body_bearing = -kPi + 2 * kPi * k / rig.lidar_beams;
      const double world_angle = op.heading + body_bearing;
      const Vec2 dir{std::cos(world_angle), std::sin(world_angle)};
      double nearest = rig.lidar_range + 1;
      for (const Obstacle& obstacle : env.obstacles) {
        auto hit = ray_circle(op.position, dir, obstacle.position, obstacle.extent / 2);
        if (hit && *hit < nearest) nearest = *hit;
      }
      if (nearest <= rig.lidar_range && nearest > 1e-9) {
        lidar.points.push_back(
            {nearest * std::cos(body_bearing), nearest * std::sin(body_bearing)});
      }
    }
    frames.lidar = std::move(lidar);
  }

  if (suite.count(SensorKind::Camera)) {
    CameraFrame camera;
    for (const Obstacle& obstacle : env.obstacles) {
      const double distance = (obstacle.position - op.position).norm();
      const double bearing = bearing_to(op, obstacle.position);
      if (distance <= rig.camera_range && std::abs(bearing) <= rig.camera_fov / 2) {
        camera.objects.push_back({obstacle.cls, bearing, distance, obstacle.id});
      }
    }
    if (!env.lanes.empty()) {
      // Signed lateral offset from the nearest lane's first segment direction.
      double best = 1e18;
      double offset = 0;
      for (const Lane& lane : env.lanes) {
        for (std::size_t i = 0; i + 1 < lane.centerline.size(); ++i) {
          const Vec2 a = lane.centerline[i];
          const Vec2 b = lane.centerline[i + 1];
          const Vec2 ab = b - a;
          const double len2 = ab.dot(ab);
          if (len2 <= 0) continue;
          const double t = std::clamp((op.position - a).dot(ab) / len2, 0.0, 1.0);
          const Vec2 nearest = a + ab * t;
          const double d = (op.position - nearest).norm();
          if (d < best) {
            best = d;
            const Vec2 unit = ab * (1.0 / std::sqrt(len2));
            const Vec2 normal{-unit.y, unit.x};  // left of travel is positive
            offset = (op.position - nearest).dot(normal);
          }
        }
      }
      camera.lane_offset = offset;
    }
    for (const TrafficSignal& signal : env.signals) {
      const double distance = (signal.position - op.position).norm();
      const double bearing = bearing_to(op, signal.position);
      if (distance <= rig.camera_range && std::abs(bearing) <= rig.camera_fov / 2) {
        camera.signals.push_back({signal.position, signal.state});
      }
    }
    frames.camera = std::move(camera);
  }

  if (suite.count(SensorKind::IMU)) {
    frames.imu = ImuFrame{op.accel, op.angular_rate};
  }

  if (suite.count(SensorKind::Microphone)) {
    MicFrame mic;
    for (const SpeechEvent& event : env.speech) {
      if (event.time >= truth.time && event.time < truth.time + rig.mic_window) {
        mic.commands.push_back(event.command);
      }
    }
    frames.mic = std::move(mic);
  }

  if (suite.count(SensorKind::Ultrasonic)) {
    UltrasonicFrame us;
    double nearest = rig.ultrasonic_range + 1;
    for (const Obstacle& obstacle : env.obstacles) {
      const double bearing = bearing_to(op, obstacle.position);
      if (std::abs(bearing) > rig.ultrasonic_half_cone) continue;
      const double distance = (obstacle.position - op.position).norm() - obstacle.extent / 2;
      if (distance >= 0 && distance < nearest) nearest = distance;
    }
    if (nearest <= rig.ultrasonic_range) us.distance = nearest;
    frames.ultrasonic = us;
  }

  if (suite.count(SensorKind::MMWRadar)) {
    RadarFrame radar;
    const Vec2 rv_velocity{op.velocity * std::cos(op.heading), op.velocity * std::sin(op.heading)};
    for (const Obstacle& obstacle : env.obstacles) {
      const Vec2 d = obstacle.position - op.position;
      const double distance = d.norm();
      if (distance > rig.radar_range || distance < 1e-9) continue;
      const Vec2 unit = d * (1.0 / distance);
      // Positive when the gap is closing.
      const double closing = (rv_velocity - obstacle.velocity).dot(unit);
      radar.targets.push_back({distance, closing, obstacle.id});
    }
    frames.radar = std::move(radar);
  }

  return frames;
}

namespace {

struct SpoofApplier {
  SensorFrames& frames;
  const SpoofSpec& spec;
  double t;

  void require(bool present) const {
    if (!present) {
      throw IncompatibleTransformError("spoof targets absent sensor " +
                                       std::string(to_string(spec.sensor)));
    }
  }

  void operator()(const GpsShift& s) const {
    require(frames.gps.has_value());
    const double elapsed = t - spec.t_start;
    frames.gps->position = frames.gps->position + s.offset + s.drift * elapsed;
  }
  void operator()(const LidarInject& s) const {
    require(frames.lidar.has_value());
    frames.lidar->points.insert(frames.lidar->points.end(), s.points.begin(), s.points.end());
  }
  void operator()(const LidarErase& s) const {
    require(frames.lidar.has_value());
    auto& points = frames.lidar->points;
    points.erase(std::remove_if(points.begin(), points.end(),
                                [&](const Vec2& p) {
                                  const double bearing = std::atan2(p.y, p.x);
                                  const double range = p.norm();
                                  return bearing >= s.bearing_min && bearing <= s.bearing_max &&
                                         range >= s.range_min && range <= s.range_max;
                                }),
                 points.end());
  }
  void operator()(const CameraClassFlip& s) const {
    require(frames.camera.has_value());
    for (CameraObject& object : frames.camera->objects) {
      if (object.cls == s.from) object.cls = s.to;
    }
  }
  void operator()(const CameraObjectInject& s) const {
    require(frames.camera.has_value());
    frames.camera->objects.push_back(s.entry);
  }
  void operator()(const CameraObjectErase& s) const {
    require(frames.camera.has_value());
    auto& objects = frames.camera->objects;
    objects.erase(std::remove_if(objects.begin(), objects.end(),
                                 [&](const CameraObject& o) {
                                   return !s.cls.has_value() || o.cls == *s.cls;
                                 }),
                  objects.end());
  }
  void operator()(const LaneShift& s) const {
    require(frames.camera.has_value());
    if (frames.camera->lane_offset) *frames.camera->lane_offset += s.offset;
  }
  void operator()(const ImuBias& s) const {
    require(frames.imu.has_value());
    frames.imu->accel += s.accel_bias;
    frames.imu->angular_rate += s.angular_bias;
  }
  void operator()(const MicInject& s) const {
    require(frames.mic.has_value());
    frames.mic->commands.push_back(s.command);
  }
  void operator()(const UltrasonicFake& s) const {
    require(frames.ultrasonic.has_value());
    frames.ultrasonic->distance = s.distance;
  }
  void operator()(const RadarInject& s) const {
    require(frames.radar.has_value());
    frames.radar->targets.push_back(s.target);
  }
  void operator()(const RadarAbsorb& s) const {
    require(frames.radar.has_value());
    auto& targets = frames.radar->targets;
    targets.erase(std::remove_if(targets.begin(), targets.end(),
                                 [&](const RadarTarget& target) {
                                   return !s.source_id.has_value() ||
                                          target.source_id == *s.source_id;
                                 }),
                  targets.end());
  }
};

}  // namespace

SensorFrames apply_spoofs(SensorFrames frames, const std::vector<SpoofSpec>& specs, double t) {
  for (const SpoofSpec& spec : specs) {
    if (!spec.active_at(t)) continue;
    std::visit(SpoofApplier{frames, spec, t}, spec.transform);
  }
  return frames;
}

// --- file formats ------------------------------------------------------------

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

[[noreturn]] void scenario_error(int line, const std::string& what) {
  throw std::runtime_error("scenario line " + std::to_string(line) + ": " + what);
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  Scenario scenario;
  scenario.source_text = read_file(path);

  std::istringstream in(scenario.source_text);
  std::string line;
  int line_number = 0;
  int next_obstacle_line = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream is(line);
    std::string tag;
    if (!(is >> tag) || tag[0] == '#') continue;
    if (tag == "name") {
      is >> scenario.name;
    } else if (tag == "dt") {
      is >> scenario.dt;
    } else if (tag == "steps") {
      is >> scenario.steps;
    } else if (tag == "rv") {
      std::string kind;
      is >> kind;
      if (kind == "car") scenario.rv = RvKind::car;
      else if (kind == "drone") scenario.rv = RvKind::drone;
      else if (kind == "agv") scenario.rv = RvKind::agv;
      else scenario_error(line_number, "unknown rv kind '" + kind + "'");
    } else if (tag == "start") {
      is >> scenario.start.position.x >> scenario.start.position.y >> scenario.start.heading >>
          scenario.start.velocity;
      double altitude;
      if (is >> altitude) scenario.start.altitude = altitude;
      is.clear();
    } else if (tag == "destination") {
      is >> scenario.destination.x >> scenario.destination.y;
    } else if (tag == "sensors") {
      std::string list;
      is >> list;
      std::stringstream ls(list);
      std::string token;
      while (std::getline(ls, token, ',')) scenario.sensors.insert(sensor_from_string(token));
    } else if (tag == "mode") {
      is >> scenario.localization;
      if (scenario.localization != "gps" && scenario.localization != "imu_integration") {
        scenario_error(line_number, "mode must be gps or imu_integration");
      }
    } else if (tag == "param") {
      std::string key;
      double value;
      is >> key >> value;
      scenario.params[key] = value;
    } else if (tag == "obstacle") {
      Obstacle obstacle;
      std::string cls, vel_tag, extent_tag;
      is >> obstacle.id >> cls >> obstacle.position.x >> obstacle.position.y >> vel_tag >>
          obstacle.velocity.x >> obstacle.velocity.y >> extent_tag >> obstacle.extent;
      if (vel_tag != "vel" || extent_tag != "extent") {
        scenario_error(line_number, "expected 'obstacle <id> <class> <x> <y> vel <vx> <vy> "
                                    "extent <e>'");
      }
      obstacle.cls = obstacle_class_from_string(cls);
      for (const Obstacle& other : scenario.environment.obstacles) {
        if (other.id == obstacle.id) scenario_error(line_number, "duplicate obstacle id");
      }
      scenario.environment.obstacles.push_back(obstacle);
      next_obstacle_line = line_number;
    } else if (tag == "script") {
      // `script <obstacle id> <t> <vx> <vy>`: velocity change at time t.
      (void)next_obstacle_line;
      int id;
      VelocityScriptEntry entry;
      is >> id >> entry.time >> entry.velocity.x >> entry.velocity.y;
      bool found = false;
      for (Obstacle& obstacle : scenario.environment.obstacles) {
        if (obstacle.id == id) {
          obstacle.script.push_back(entry);
          found = true;
        }
      }
      if (!found) scenario_error(line_number, "script references unknown obstacle");
    } else if (tag == "lane") {
      Lane lane;
      is >> lane.half_width;
      double x, y;
      while (is >> x >> y) lane.centerline.push_back({x, y});
      is.clear();
      if (lane.centerline.size() < 2) scenario_error(line_number, "lane needs two points");
      scenario.environment.lanes.push_back(std::move(lane));
    } else if (tag == "signal") {
      TrafficSignal signal;
      std::string state;
      is >> signal.position.x >> signal.position.y >> state;
      if (state == "red") signal.state = SignalState::red;
      else if (state == "green") signal.state = SignalState::green;
      else scenario_error(line_number, "signal state must be red or green");
      scenario.environment.signals.push_back(signal);
    } else if (tag == "nofly") {
      RectZone zone;
      is >> zone.min.x >> zone.min.y >> zone.max.x >> zone.max.y;
      scenario.environment.no_fly_zones.push_back(zone);
    } else if (tag == "landmark") {
      Landmark landmark;
      is >> landmark.position.x >> landmark.position.y >> landmark.tag;
      scenario.environment.landmarks.push_back(landmark);
    } else if (tag == "wall") {
      RectZone zone;
      is >> zone.min.x >> zone.min.y >> zone.max.x >> zone.max.y;
      scenario.walls.push_back(zone);
    } else if (tag == "say") {
      SpeechEvent event;
      is >> event.time;
      std::string rest;
      std::getline(is, rest);
      const std::size_t first = rest.find_first_not_of(" \t");
      if (first == std::string::npos) scenario_error(line_number, "say needs a command");
      event.command = rest.substr(first);
      scenario.environment.speech.push_back(event);
      is.clear();
    } else {
      scenario_error(line_number, "unknown directive '" + tag + "'");
    }
    if (is.fail()) scenario_error(line_number, "malformed fields");
  }
  if (scenario.sensors.empty()) scenario_error(0, "scenario lists no sensors");
  if (scenario.dt <= 0 || scenario.steps <= 0) scenario_error(0, "dt and steps must be positive");
  return scenario;
}

SpoofPlan load_spoof_plan(const std::string& path) {
  SpoofPlan plan;
  plan.source_text = read_file(path);

  std::istringstream in(plan.source_text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream is(line);
    std::string tag;
    if (!(is >> tag) || tag[0] == '#') continue;
    if (tag == "mode") {
      std::string mode;
      is >> mode;
      if (mode == "blurring") plan.two_round_mode = TwoRoundMode::blurring;
      else if (mode == "roi") plan.two_round_mode = TwoRoundMode::roi;
      else throw std::runtime_error("spoof line " + std::to_string(line_number) +
                                    ": mode must be blurring or roi");
      continue;
    }
    if (tag != "spoof") {
      throw std::runtime_error("spoof line " + std::to_string(line_number) +
                               ": unknown directive '" + tag + "'");
    }
    SpoofSpec spec;
    std::string sensor, kind;
    is >> sensor >> spec.t_start >> spec.t_end >> kind;
    spec.sensor = sensor_from_string(sensor);
    spec.label = kind;
    if (spec.t_start >= spec.t_end) {
      throw std::runtime_error("spoof line " + std::to_string(line_number) +
                               ": window must satisfy t_start < t_end");
    }
    auto expect_sensor = [&](SensorKind expected) {
      if (spec.sensor != expected) {
        throw std::runtime_error("spoof line " + std::to_string(line_number) + ": transform '" +
                                 kind + "' applies to " + std::string(to_string(expected)));
      }
    };
    if (kind == "gps_shift") {
      expect_sensor(SensorKind::GPS);
      GpsShift s;
      is >> s.offset.x >> s.offset.y;
      double dx, dy;
      if (is >> dx >> dy) s.drift = {dx, dy};
      is.clear();
      spec.transform = s;
    } else if (kind == "lidar_inject") {
      expect_sensor(SensorKind::LiDAR);
      // `lidar_inject <cx> <cy> <n> <radius>`: n points on a disc, body frame.
      double cx, cy, radius;
      int n;
      is >> cx >> cy >> n >> radius;
      LidarInject s;
      for (int i = 0; i < n; ++i) {
        const double a = 2 * kPi * i / std::max(n, 1);
        const double r = radius * (0.4 + 0.6 * ((i % 5) / 4.0));
        s.points.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
      }
      spec.transform = s;
    } else if (kind == "lidar_erase") {
      expect_sensor(SensorKind::LiDAR);
      LidarErase s;
      is >> s.bearing_min >> s.bearing_max >> s.range_min >> s.range_max;
      spec.transform = s;
    } else if (kind == "cam_flip") {
      expect_sensor(SensorKind::Camera);
      std::string from, to;
      is >> from >> to;
      spec.transform =
          CameraClassFlip{obstacle_class_from_string(from), obstacle_class_from_string(to)};
    } else if (kind == "cam_inject") {
      expect_sensor(SensorKind::Camera);
      std::string cls;
      CameraObject entry;
      is >> cls >> entry.bearing >> entry.distance;
      entry.cls = obstacle_class_from_string(cls);
      entry.source_id = -2;
      spec.transform = CameraObjectInject{entry};
    } else if (kind == "cam_erase") {
      expect_sensor(SensorKind::Camera);
      std::string cls;
      CameraObjectErase s;
      if (is >> cls && cls != "all") s.cls = obstacle_class_from_string(cls);
      is.clear();
      spec.transform = s;
    } else if (kind == "lane_shift") {
      expect_sensor(SensorKind::Camera);
      LaneShift s;
      is >> s.offset;
      spec.transform = s;
    } else if (kind == "imu_bias") {
      expect_sensor(SensorKind::IMU);
      ImuBias s;
      is >> s.accel_bias >> s.angular_bias;
      spec.transform = s;
    } else if (kind == "mic_inject") {
      expect_sensor(SensorKind::Microphone);
      std::string rest;
      std::getline(is, rest);
      const std::size_t first = rest.find_first_not_of(" \t");
      if (first == std::string::npos) {
        throw std::runtime_error("spoof line " + std::to_string(line_number) +
                                 ": mic_inject needs a command");
      }
      spec.transform = MicInject{rest.substr(first)};
      is.clear();
    } else if (kind == "us_fake") {
      expect_sensor(SensorKind::Ultrasonic);
      UltrasonicFake s;
      double d;
      if (is >> d) s.distance = d;
      is.clear();
      spec.transform = s;
    } else if (kind == "radar_inject") {
      expect_sensor(SensorKind::MMWRadar);
      RadarTarget target;
      is >> target.distance >> target.radial_speed;
      target.source_id = -2;
      spec.transform = RadarInject{target};
    } else if (kind == "radar_absorb") {
      expect_sensor(SensorKind::MMWRadar);
      std::string what;
      RadarAbsorb s;
      if (is >> what && what != "all") s.source_id = std::stoi(what);
      is.clear();
      spec.transform = s;
    } else {
      throw std::runtime_error("spoof line " + std::to_string(line_number) +
                               ": unknown transform '" + kind + "'");
    }
    if (is.fail()) {
      throw std::runtime_error("spoof line " + std::to_string(line_number) +
                               ": malformed fields");
    }
    plan.specs.push_back(std::move(spec));
  }
  return plan;
}

}  // namespace rvspoof
