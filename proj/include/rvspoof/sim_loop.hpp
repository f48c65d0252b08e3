// The closed perception -> planning -> control loop over rendered (and
// possibly spoofed) sensor frames, plus the hazard classifier that maps a
// finished trace back to the attack path it realizes.
#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rvspoof/sim_world.hpp"

namespace rvspoof {

enum class Priority : std::uint8_t { ignore, caution, normal };

struct DetectedObject {
  std::optional<int> source_id;
  ObstacleClass cls = ObstacleClass::vehicle;
  Vec2 position;  // world frame (per the localization estimate)
  double extent = 1.0;
  double confidence = 1.0;
};

struct Track {
  int id = 0;
  Vec2 position;
  Vec2 velocity;
  double extent = 1.0;
  std::vector<Vec2> predicted;  // linear extrapolation over the horizon
};

struct EstimatedState {
  Vec2 position;
  double altitude = 0;
  double velocity = 0;
  double heading = 0;
  std::vector<DetectedObject> detected_objects;
  std::vector<Track> tracks;
  std::map<int, Priority> priorities;  // track id -> priority
  std::optional<double> lane_offset;
  std::optional<Vec2> mission_goal;
  std::optional<CameraSignalView> selected_signal;  // position-keyed ROI pick
  int next_track_id = 1;
};

enum class DiscreteAction : std::uint8_t { none, hard_brake, land, park };

std::string_view to_string(DiscreteAction action);

struct InstantPolicy {
  double target_speed = 0;
  double steer_rate = 0;
  DiscreteAction discrete = DiscreteAction::none;
};

struct LongTermPolicy {
  std::vector<Vec2> route;
  Vec2 destination;
};

struct ControlOutput {
  double linear_accel = 0;
  double yaw_rate = 0;
  DiscreteAction discrete = DiscreteAction::none;
};

enum class LocalizationMode : std::uint8_t { gps, imu_integration };

// Loop parameters; every field is overridable from the scenario file via
// `param <name> <value>`.
struct SimParams {
  double dt = 0.1;
  double a_max = 6.0;
  double omega_max = 1.5;
  double v_nom = 10.0;
  double d_safe = 8.0;       // margin beyond the kinematic stopping distance
  double horizon = 3.0;      // tracking prediction window
  double r_replan = 2.0;
  double cluster_gap = 1.0;  // lidar clustering split threshold g
  double corridor_half_width = 2.0;
  double assoc_radius = 3.0;
  double lookahead = 4.0;
  double d_goal = 2.0;
  double k_speed = 2.0;
  double k_heading = 2.5;
  double signal_stop_distance = 8.0;
  double roi_ahead = 30.0;   // how far ahead the signal ROI reaches
  double collision_margin = 0.3;
  int destab_steps = 10;     // consecutive saturated-yaw steps
  double grid_cell = 1.0;
  double descent_rate = 1.0; // landing sink rate

  static SimParams from_scenario(const Scenario& scenario);
};

struct NoRouteError : std::runtime_error {
  explicit NoRouteError(const std::string& what) : std::runtime_error(what) {}
};

// Occupancy grid over the scenario area; walls block cells.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(const std::vector<RectZone>& walls, Vec2 area_min, Vec2 area_max,
                double cell = 1.0);

  bool blocked(const Vec2& p) const;
  // Shortest 8-connected path between cells; NoRoute when unreachable.
  std::vector<Vec2> shortest_path(const Vec2& from, const Vec2& to) const;

  // Static map annotations carried with the grid.
  void set_no_fly_zones(std::vector<RectZone> zones) { no_fly_zones_ = std::move(zones); }
  bool in_no_fly(const Vec2& p) const {
    for (const RectZone& zone : no_fly_zones_) {
      if (zone.contains(p)) return true;
    }
    return false;
  }

 private:
  Vec2 origin_;
  double cell_ = 1.0;
  int nx_ = 0, ny_ = 0;
  std::vector<bool> cells_;
  std::vector<RectZone> no_fly_zones_;
};

EstimatedState perceive(const SensorFrames& frames, LocalizationMode mode,
                        const EstimatedState& prev, const SimParams& params);

std::pair<LongTermPolicy, InstantPolicy> plan(const EstimatedState& est,
                                              const LongTermPolicy& long_term,
                                              const OccupancyGrid& grid, const SimParams& params);

ControlOutput control(const InstantPolicy& policy, const EstimatedState& est,
                      const SimParams& params);

enum class HazardOutcome : std::uint8_t {
  none,
  collision,
  emergency_stop,
  off_road,
  wrong_destination,
  forced_landing,
  destabilized,
  traffic_violation,
};

std::string_view to_string(HazardOutcome outcome);

struct HazardReport {
  HazardOutcome outcome = HazardOutcome::none;
  std::optional<AttackPath> realized_path;
  std::vector<int> evidence;  // trace step indices backing the classification
};

struct TraceStep {
  double time = 0;
  OperationState truth;
  std::vector<Vec2> obstacle_positions;  // ground-truth environment stream
  Vec2 est_position;
  double est_heading = 0;
  double est_velocity = 0;
  std::size_t detections = 0;
  InstantPolicy policy;
  ControlOutput control;
  std::vector<std::string> active_spoofs;
  bool mission_changed = false;
};

struct Trace {
  std::vector<TraceStep> steps;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string scenario_name;
  std::optional<Vec2> final_mission_goal;
};

// SLAM relocalization hook: runs after perception and may override the
// position estimate (exercised by the loop-closure attack).
using SlamHook = std::function<std::optional<Vec2>(const EstimatedState&, double)>;

struct SimulationResult {
  Trace trace;
  HazardReport report;
};

SimulationResult run_scenario(const Scenario& scenario, const SpoofPlan& spoofs,
                              std::uint64_t seed, const SlamHook& slam_hook = {});

HazardReport classify_outcome(const Trace& trace, const Scenario& scenario,
                              const SpoofPlan& spoofs, const SimParams& params);

std::uint64_t trace_hash(const Trace& trace);
void write_trace(std::ostream& out, const Trace& trace, const HazardReport& report);

}  // namespace rvspoof
