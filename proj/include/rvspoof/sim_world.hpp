// Ground-truth world state, per-sensor frame rendering, and time-windowed
// spoofing transforms applied to rendered frames only.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rvspoof/flow_model.hpp"

namespace rvspoof {

struct Vec2 {
  double x = 0, y = 0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

double wrap_heading(double a);  // into (-pi, pi]

enum class RvKind : std::uint8_t { car, drone, agv };
enum class ObstacleClass : std::uint8_t { vehicle, pedestrian, drone, wall };
enum class SignalState : std::uint8_t { red, green };

std::string_view to_string(ObstacleClass cls);
ObstacleClass obstacle_class_from_string(std::string_view text);

struct VelocityScriptEntry {
  double time = 0;
  Vec2 velocity;
};

struct Obstacle {
  int id = 0;
  ObstacleClass cls = ObstacleClass::vehicle;
  Vec2 position;
  Vec2 velocity;
  double extent = 1.0;  // diameter
  std::vector<VelocityScriptEntry> script;  // velocity changes at given times
};

struct Lane {
  std::vector<Vec2> centerline;
  double half_width = 2.0;
};

struct TrafficSignal {
  Vec2 position;
  SignalState state = SignalState::green;
};

struct RectZone {
  Vec2 min, max;
  bool contains(const Vec2& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
};

struct Landmark {
  Vec2 position;
  std::string tag;
};

struct SpeechEvent {
  double time = 0;
  std::string command;
};

struct OperationState {
  Vec2 position;
  double altitude = 0;      // meters, drones only
  double velocity = 0;      // >= 0, m/s
  double heading = 0;       // (-pi, pi]
  double angular_rate = 0;  // rad/s applied over the last step
  double accel = 0;         // m/s^2 applied over the last step
};

struct EnvironmentState {
  std::vector<Obstacle> obstacles;
  std::vector<Lane> lanes;
  std::vector<TrafficSignal> signals;
  std::vector<RectZone> no_fly_zones;
  std::vector<Landmark> landmarks;
  std::vector<SpeechEvent> speech;  // scenario-scripted cabin commands
};

struct SystemState {
  OperationState operation;
  EnvironmentState environment;
  double time = 0;
};

// --- Sensor frames (z_t) ---------------------------------------------------

struct GpsFrame {
  Vec2 position;
};

struct LidarFrame {
  std::vector<Vec2> points;  // body frame: +x forward, +y left
  int beam_count = 360;
  double max_range = 100;
};

struct CameraObject {
  ObstacleClass cls = ObstacleClass::vehicle;
  double bearing = 0;    // body frame
  double distance = 0;
  int source_id = -1;    // render-side bookkeeping for erase predicates
};

struct CameraSignalView {
  Vec2 position;  // world frame
  SignalState state = SignalState::green;
};

struct CameraFrame {
  std::vector<CameraObject> objects;
  std::optional<double> lane_offset;  // signed lateral offset from lane center
  std::vector<CameraSignalView> signals;
};

struct ImuFrame {
  double accel = 0;
  double angular_rate = 0;
};

struct MicFrame {
  std::vector<std::string> commands;
};

struct UltrasonicFrame {
  std::optional<double> distance;
};

struct RadarTarget {
  double distance = 0;
  double radial_speed = 0;  // positive when closing
  int source_id = -1;
};

struct RadarFrame {
  std::vector<RadarTarget> targets;
};

// Frames keyed by sensor; only the suite's sensors are populated.
struct SensorFrames {
  std::optional<GpsFrame> gps;
  std::optional<LidarFrame> lidar;
  std::optional<CameraFrame> camera;
  std::optional<ImuFrame> imu;
  std::optional<MicFrame> mic;
  std::optional<UltrasonicFrame> ultrasonic;
  std::optional<RadarFrame> radar;

  bool has(SensorKind kind) const;
};

struct SensorRigConfig {
  int lidar_beams = 360;
  double lidar_range = 100;
  double camera_fov = 3.14159265358979323846 / 2;  // 90 degrees
  double camera_range = 60;
  double ultrasonic_range = 5;
  double ultrasonic_half_cone = 0.26;  // ~15 degrees
  double radar_range = 100;
  double mic_window = 0.1;  // speech events land in one render step
};

// Deterministic forward model: ray-cast LiDAR, cone-filtered camera and
// ultrasonic, exact IMU derivatives, radar range/closing-speed pairs, and
// scripted microphone commands. The seed is reserved for future noise; the
// current renderers are exact.
SensorFrames render_frames(const SystemState& truth, const std::set<SensorKind>& suite,
                           std::uint64_t seed, const SensorRigConfig& rig = {});

// --- Spoofing transforms ----------------------------------------------------

struct GpsShift {
  Vec2 offset;
  Vec2 drift;  // m/s, applied as offset + drift * (t - t_start)
};
struct LidarInject {
  std::vector<Vec2> points;  // body-frame template appended to the frame
};
struct LidarErase {
  double bearing_min = -3.15, bearing_max = 3.15;
  double range_min = 0, range_max = 1e9;
};
struct CameraClassFlip {
  ObstacleClass from = ObstacleClass::vehicle;
  ObstacleClass to = ObstacleClass::vehicle;
};
struct CameraObjectInject {
  CameraObject entry;
};
struct CameraObjectErase {
  std::optional<ObstacleClass> cls;  // nullopt erases everything
};
struct LaneShift {
  double offset = 0;
};
struct ImuBias {
  double accel_bias = 0;
  double angular_bias = 0;
};
struct MicInject {
  std::string command;
};
struct UltrasonicFake {
  std::optional<double> distance;
};
struct RadarInject {
  RadarTarget target;
};
struct RadarAbsorb {
  std::optional<int> source_id;  // nullopt absorbs everything
};

using SpoofTransform =
    std::variant<GpsShift, LidarInject, LidarErase, CameraClassFlip, CameraObjectInject,
                 CameraObjectErase, LaneShift, ImuBias, MicInject, UltrasonicFake, RadarInject,
                 RadarAbsorb>;

struct SpoofSpec {
  SensorKind sensor = SensorKind::GPS;
  double t_start = 0;
  double t_end = 0;  // window [t_start, t_end)
  SpoofTransform transform;
  std::string label;  // short name recorded in traces

  bool active_at(double t) const { return t >= t_start && t < t_end; }
};

struct IncompatibleTransformError : std::runtime_error {
  explicit IncompatibleTransformError(const std::string& what) : std::runtime_error(what) {}
};

// Applies every spec whose window contains t to its sensor's frame, in list
// order. Frames for sensors without an active spec pass through unchanged.
SensorFrames apply_spoofs(SensorFrames frames, const std::vector<SpoofSpec>& specs, double t);

// --- Scenario and spoof files ----------------------------------------------

struct Scenario {
  std::string name = "scenario";
  RvKind rv = RvKind::car;
  double dt = 0.1;
  int steps = 100;
  OperationState start;
  Vec2 destination;
  std::set<SensorKind> sensors;
  std::string localization = "gps";  // gps | imu_integration
  EnvironmentState environment;
  std::vector<RectZone> walls;  // rasterized into the routing grid
  std::map<std::string, double> params;  // overrides for loop parameters
  std::string source_text;  // verbatim file contents, hashed into traces
};

struct SpoofPlan {
  std::vector<SpoofSpec> specs;
  std::optional<TwoRoundMode> two_round_mode;
  std::string source_text;
};

Scenario load_scenario(const std::string& path);
SpoofPlan load_spoof_plan(const std::string& path);

}  // namespace rvspoof
