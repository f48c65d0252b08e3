#include "rvspoof/sim_loop.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace rvspoof {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec2 heading_dir(double heading) { return {std::cos(heading), std::sin(heading)}; }

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 <= 0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

bool is_env_transform(const SpoofTransform& transform) {
  return std::holds_alternative<LidarInject>(transform) ||
         std::holds_alternative<LidarErase>(transform) ||
         std::holds_alternative<CameraClassFlip>(transform) ||
         std::holds_alternative<CameraObjectInject>(transform) ||
         std::holds_alternative<CameraObjectErase>(transform) ||
         std::holds_alternative<LaneShift>(transform) ||
         std::holds_alternative<UltrasonicFake>(transform) ||
         std::holds_alternative<RadarInject>(transform) ||
         std::holds_alternative<RadarAbsorb>(transform);
}

bool is_operation_transform(const SpoofTransform& transform) {
  return std::holds_alternative<GpsShift>(transform) ||
         std::holds_alternative<ImuBias>(transform);
}

}  // namespace

std::string_view to_string(DiscreteAction action) {
  switch (action) {
    case DiscreteAction::none: return "none";
    case DiscreteAction::hard_brake: return "hard_brake";
    case DiscreteAction::land: return "land";
    case DiscreteAction::park: return "park";
  }
  return "?";
}

std::string_view to_string(HazardOutcome outcome) {
  switch (outcome) {
    case HazardOutcome::none: return "none";
    case HazardOutcome::collision: return "collision";
    case HazardOutcome::emergency_stop: return "emergency_stop";
    case HazardOutcome::off_road: return "off_road";
    case HazardOutcome::wrong_destination: return "wrong_destination";
    case HazardOutcome::forced_landing: return "forced_landing";
    case HazardOutcome::destabilized: return "destabilized";
    case HazardOutcome::traffic_violation: return "traffic_violation";
  }
  return "?";
}

SimParams SimParams::from_scenario(const Scenario& scenario) {
  SimParams params;
  params.dt = scenario.dt;
  auto get = [&](const char* key, double& field) {
    auto it = scenario.params.find(key);
    if (it != scenario.params.end()) field = it->second;
  };
  get("a_max", params.a_max);
  get("omega_max", params.omega_max);
  get("v_nom", params.v_nom);
  get("d_safe", params.d_safe);
  get("horizon", params.horizon);
  get("r_replan", params.r_replan);
  get("cluster_gap", params.cluster_gap);
  get("corridor_half_width", params.corridor_half_width);
  get("assoc_radius", params.assoc_radius);
  get("lookahead", params.lookahead);
  get("d_goal", params.d_goal);
  get("k_speed", params.k_speed);
  get("k_heading", params.k_heading);
  get("signal_stop_distance", params.signal_stop_distance);
  get("roi_ahead", params.roi_ahead);
  get("collision_margin", params.collision_margin);
  get("grid_cell", params.grid_cell);
  get("descent_rate", params.descent_rate);
  auto it = scenario.params.find("destab_steps");
  if (it != scenario.params.end()) params.destab_steps = static_cast<int>(it->second);
  return params;
}

OccupancyGrid::OccupancyGrid(const std::vector<RectZone>& walls, Vec2 area_min, Vec2 area_max,
                             double cell)
    : origin_(area_min), cell_(cell) {
  nx_ = std::max(1, static_cast<int>(std::ceil((area_max.x - area_min.x) / cell)));
  ny_ = std::max(1, static_cast<int>(std::ceil((area_max.y - area_min.y) / cell)));
  cells_.assign(static_cast<std::size_t>(nx_) * ny_, false);
  for (int iy = 0; iy < ny_; ++iy) {
    for (int ix = 0; ix < nx_; ++ix) {
      const Vec2 center{origin_.x + (ix + 0.5) * cell_, origin_.y + (iy + 0.5) * cell_};
      for (const RectZone& wall : walls) {
        if (wall.contains(center)) {
          cells_[static_cast<std::size_t>(iy) * nx_ + ix] = true;
          break;
        }
      }
    }
  }
}

bool OccupancyGrid::blocked(const Vec2& p) const {
  const int ix = static_cast<int>(std::floor((p.x - origin_.x) / cell_));
  const int iy = static_cast<int>(std::floor((p.y - origin_.y) / cell_));
  if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return false;
  return cells_[static_cast<std::size_t>(iy) * nx_ + ix];
}

std::vector<Vec2> OccupancyGrid::shortest_path(const Vec2& from, const Vec2& to) const {
  auto cell_of = [&](const Vec2& p) {
    return std::pair<int, int>{
        std::clamp(static_cast<int>(std::floor((p.x - origin_.x) / cell_)), 0, nx_ - 1),
        std::clamp(static_cast<int>(std::floor((p.y - origin_.y) / cell_)), 0, ny_ - 1)};
  };
  const auto [sx, sy] = cell_of(from);
  const auto [tx, ty] = cell_of(to);
  auto index = [&](int x, int y) { return static_cast<std::size_t>(y) * nx_ + x; };

  // Dijkstra with diagonal cost sqrt(2); ties resolve by cell index so the
  // route is deterministic.
  constexpr double kUnvisited = 1e18;
  std::vector<double> cost(cells_.size(), kUnvisited);
  std::vector<int> parent(cells_.size(), -1);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  cost[index(sx, sy)] = 0;
  parent[index(sx, sy)] = static_cast<int>(index(sx, sy));
  queue.push({0, index(sx, sy)});
  while (!queue.empty()) {
    const auto [c, node] = queue.top();
    queue.pop();
    if (c > cost[node] + 1e-12) continue;
    if (node == index(tx, ty)) break;
    const int x = static_cast<int>(node) % nx_;
    const int y = static_cast<int>(node) / nx_;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= nx_ || ny >= ny_) continue;
        const std::size_t next = index(nx, ny);
        if (cells_[next]) continue;
        const double step = (dx != 0 && dy != 0) ? 1.4142135623730951 : 1.0;
        if (cost[node] + step * cell_ < cost[next] - 1e-12) {
          cost[next] = cost[node] + step * cell_;
          parent[next] = static_cast<int>(node);
          queue.push({cost[next], next});
        }
      }
    }
  }
  if (parent[index(tx, ty)] < 0) {
    throw NoRouteError("no route through the occupancy grid");
  }
  std::vector<Vec2> reversed;
  int current = static_cast<int>(index(tx, ty));
  const int start = static_cast<int>(index(sx, sy));
  while (current != start) {
    const int cy = current / nx_;
    const int cx = current % nx_;
    reversed.push_back({origin_.x + (cx + 0.5) * cell_, origin_.y + (cy + 0.5) * cell_});
    current = parent[current];
  }
  std::vector<Vec2> route(reversed.rbegin(), reversed.rend());
  route.push_back(to);
  return route;
}

EstimatedState perceive(const SensorFrames& frames, LocalizationMode mode,
                        const EstimatedState& prev, const SimParams& params) {
  EstimatedState est;
  est.next_track_id = prev.next_track_id;
  est.mission_goal = prev.mission_goal;
  est.altitude = prev.altitude;

  // Localization: dead-reckon the pose with the previous estimate, then
  // take position from GPS when available, and fold in the inertial rates.
  est.position = prev.position + heading_dir(prev.heading) * (prev.velocity * params.dt);
  if (mode == LocalizationMode::gps && frames.gps) est.position = frames.gps->position;
  est.velocity = prev.velocity;
  est.heading = prev.heading;
  if (frames.imu) {
    est.velocity = std::max(0.0, prev.velocity + frames.imu->accel * params.dt);
    est.heading = wrap_heading(prev.heading + frames.imu->angular_rate * params.dt);
  }

  // Object detection: 1-D gap clustering over the lidar sweep.
  if (frames.lidar && !frames.lidar->points.empty()) {
    std::vector<Vec2> points = frames.lidar->points;
    std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
      return std::atan2(a.y, a.x) < std::atan2(b.y, b.x);
    });
    std::vector<std::vector<Vec2>> clusters;
    for (const Vec2& p : points) {
      if (clusters.empty() || (p - clusters.back().back()).norm() > params.cluster_gap) {
        clusters.push_back({p});
      } else {
        clusters.back().push_back(p);
      }
    }
    // The sweep is circular: the last cluster may continue into the first.
    if (clusters.size() > 1 &&
        (clusters.front().front() - clusters.back().back()).norm() <= params.cluster_gap) {
      clusters.front().insert(clusters.front().begin(), clusters.back().begin(),
                              clusters.back().end());
      clusters.pop_back();
    }
    const Vec2 forward = heading_dir(est.heading);
    const Vec2 left{-forward.y, forward.x};
    for (const auto& cluster : clusters) {
      Vec2 sum{};
      for (const Vec2& p : cluster) sum = sum + p;
      const Vec2 body = sum * (1.0 / static_cast<double>(cluster.size()));
      double spread = 0;
      for (const Vec2& p : cluster) spread = std::max(spread, (p - body).norm());
      DetectedObject object;
      object.position = est.position + forward * body.x + left * body.y;
      object.extent = std::max(0.5, 2 * spread);
      object.cls = ObstacleClass::vehicle;
      object.confidence = std::min(1.0, cluster.size() / 10.0);
      est.detected_objects.push_back(object);
    }
  }

  // Camera fusion: classes attach to the nearest lidar cluster; unmatched
  // camera objects become detections of their own.
  if (frames.camera) {
    const Vec2 forward = heading_dir(est.heading);
    const Vec2 left{-forward.y, forward.x};
    for (const CameraObject& object : frames.camera->objects) {
      const Vec2 body{object.distance * std::cos(object.bearing),
                      object.distance * std::sin(object.bearing)};
      const Vec2 world = est.position + forward * body.x + left * body.y;
      DetectedObject* nearest = nullptr;
      double best = params.assoc_radius;
      for (DetectedObject& existing : est.detected_objects) {
        const double d = (existing.position - world).norm();
        if (d < best) {
          best = d;
          nearest = &existing;
        }
      }
      if (nearest) {
        nearest->cls = object.cls;
        nearest->source_id = object.source_id >= 0 ? std::optional<int>(object.source_id)
                                                   : std::nullopt;
      } else {
        DetectedObject fresh;
        fresh.position = world;
        fresh.cls = object.cls;
        fresh.extent = 1.0;
        fresh.confidence = 1.0;
        if (object.source_id >= 0) fresh.source_id = object.source_id;
        est.detected_objects.push_back(fresh);
      }
    }
    est.lane_offset = frames.camera->lane_offset;

    // ROI signal selection keys off the position estimate: the nearest
    // signal ahead of where the RV believes it is.
    const CameraSignalView* chosen = nullptr;
    double best_along = params.roi_ahead;
    for (const CameraSignalView& signal : frames.camera->signals) {
      const double along = (signal.position - est.position).dot(forward);
      if (along > 0.5 && along < best_along) {
        best_along = along;
        chosen = &signal;
      }
    }
    if (chosen) est.selected_signal = *chosen;
  }

  // Nearest-neighbour track association with linear extrapolation.
  std::vector<bool> used(prev.tracks.size(), false);
  const int horizon_steps = static_cast<int>(std::round(params.horizon / params.dt));
  for (const DetectedObject& object : est.detected_objects) {
    const Track* matched = nullptr;
    std::size_t matched_index = 0;
    double best = params.assoc_radius;
    for (std::size_t i = 0; i < prev.tracks.size(); ++i) {
      if (used[i]) continue;
      const double d = (prev.tracks[i].position - object.position).norm();
      if (d < best) {
        best = d;
        matched = &prev.tracks[i];
        matched_index = i;
      }
    }
    Track track;
    if (matched) {
      used[matched_index] = true;
      track.id = matched->id;
      track.velocity = (object.position - matched->position) * (1.0 / params.dt);
    } else {
      track.id = est.next_track_id++;
      track.velocity = {0, 0};
    }
    track.position = object.position;
    track.extent = object.extent;
    for (int k = 1; k <= horizon_steps; ++k) {
      track.predicted.push_back(track.position + track.velocity * (k * params.dt));
    }
    est.tracks.push_back(std::move(track));
  }

  // Priorities: caution when the predicted path crosses the RV corridor.
  const Vec2 forward = heading_dir(est.heading);
  const Vec2 corridor_end =
      est.position + forward * (std::max(est.velocity, 1.0) * params.horizon + params.d_safe);
  for (std::size_t i = 0; i < est.tracks.size(); ++i) {
    const Track& track = est.tracks[i];
    const double pad = params.corridor_half_width + est.detected_objects[i].extent / 2;
    bool caution = point_segment_distance(track.position, est.position, corridor_end) < pad;
    for (const Vec2& p : track.predicted) {
      if (caution) break;
      caution = point_segment_distance(p, est.position, corridor_end) < pad;
    }
    est.priorities[track.id] = caution ? Priority::caution : Priority::ignore;
  }

  // Speech recognition is a direct command-to-goal map.
  if (frames.mic) {
    for (const std::string& command : frames.mic->commands) {
      std::istringstream is(command);
      std::string verb;
      double x, y;
      if (is >> verb >> x >> y && verb == "goto") est.mission_goal = Vec2{x, y};
    }
  }

  // Ultrasonic distance becomes a close-range forward detection.
  if (frames.ultrasonic && frames.ultrasonic->distance) {
    DetectedObject object;
    object.position = est.position + forward * (*frames.ultrasonic->distance);
    object.extent = 0.5;
    object.confidence = 1.0;
    est.detected_objects.push_back(object);
    Track track;
    track.id = est.next_track_id++;
    track.position = object.position;
    est.priorities[track.id] = Priority::caution;
    est.tracks.push_back(track);
  }

  return est;
}

std::pair<LongTermPolicy, InstantPolicy> plan(const EstimatedState& est,
                                              const LongTermPolicy& long_term,
                                              const OccupancyGrid& grid,
                                              const SimParams& params) {
  LongTermPolicy out = long_term;
  const Vec2 destination = est.mission_goal.value_or(long_term.destination);
  const bool mission_changed = (destination - long_term.destination).norm() > 1e-9;
  if (mission_changed) out.destination = destination;

  bool replan = out.route.empty() || mission_changed;
  if (!replan) {
    double nearest = 1e18;
    for (std::size_t i = 0; i + 1 < out.route.size(); ++i) {
      nearest = std::min(nearest, point_segment_distance(est.position, out.route[i],
                                                         out.route[i + 1]));
    }
    if (out.route.size() == 1) nearest = (est.position - out.route[0]).norm();
    replan = nearest > params.r_replan;
  }
  if (replan) out.route = grid.shortest_path(est.position, out.destination);

  InstantPolicy policy;
  const double dist_to_goal = (out.destination - est.position).norm();
  if (dist_to_goal < params.d_goal) {
    policy.target_speed = 0;
    policy.steer_rate = 0;
    policy.discrete = est.velocity < 0.1 ? DiscreteAction::park : DiscreteAction::none;
    return {out, policy};
  }

  // Pure-pursuit style waypoint selection: project onto the route, then
  // walk forward to the first point at lookahead distance.
  std::size_t nearest_index = 0;
  double nearest_distance = 1e18;
  for (std::size_t i = 0; i < out.route.size(); ++i) {
    const double d = (out.route[i] - est.position).norm();
    if (d < nearest_distance) {
      nearest_distance = d;
      nearest_index = i;
    }
  }
  Vec2 waypoint = out.route.back();
  for (std::size_t i = nearest_index; i < out.route.size(); ++i) {
    if ((out.route[i] - est.position).norm() >= params.lookahead) {
      waypoint = out.route[i];
      break;
    }
  }
  Vec2 aim = waypoint - est.position;
  if (est.lane_offset) {
    // Steer back toward the lane centre: the offset is positive leftwards.
    const Vec2 forward = heading_dir(est.heading);
    const Vec2 left{-forward.y, forward.x};
    aim = aim - left * (*est.lane_offset);
  }
  const double desired_heading = std::atan2(aim.y, aim.x);
  policy.steer_rate = params.k_heading * wrap_heading(desired_heading - est.heading);
  policy.target_speed = std::min(params.v_nom, 0.8 * dist_to_goal);

  // Kinematic stopping distance plus one control step of latency.
  const double stopping =
      est.velocity * est.velocity / (2 * params.a_max) + 1.5 * est.velocity * params.dt;

  if (est.selected_signal && est.selected_signal->state == SignalState::red) {
    const double along =
        (est.selected_signal->position - est.position).dot(heading_dir(est.heading));
    if (along > 0 && along < stopping + params.signal_stop_distance) {
      policy.target_speed = 0;
    }
  }

  for (const Track& track : est.tracks) {
    auto it = est.priorities.find(track.id);
    if (it == est.priorities.end() || it->second != Priority::caution) continue;
    // Gap to the estimated surface, not the cluster centroid.
    const double gap = (track.position - est.position).norm() - track.extent / 2;
    if (gap < stopping + params.d_safe) {
      policy.target_speed = 0;
      policy.discrete = DiscreteAction::hard_brake;
      break;
    }
  }

  if (grid.in_no_fly(est.position)) {
    policy.target_speed = 0;
    policy.discrete = DiscreteAction::land;
  }
  return {out, policy};
}

ControlOutput control(const InstantPolicy& policy, const EstimatedState& est,
                      const SimParams& params) {
  ControlOutput out;
  out.discrete = policy.discrete;
  if (policy.discrete == DiscreteAction::hard_brake || policy.discrete == DiscreteAction::land) {
    out.linear_accel = -params.a_max;
    out.yaw_rate = 0;
    return out;
  }
  out.linear_accel =
      std::clamp(params.k_speed * (policy.target_speed - est.velocity), -params.a_max,
                 params.a_max);
  out.yaw_rate = std::clamp(policy.steer_rate, -params.omega_max, params.omega_max);
  return out;
}

SimulationResult run_scenario(const Scenario& scenario, const SpoofPlan& spoofs,
                              std::uint64_t seed, const SlamHook& slam_hook) {
  const SimParams params = SimParams::from_scenario(scenario);
  SensorRigConfig rig;
  rig.mic_window = scenario.dt;

  // Routing area: everything the scenario mentions, padded.
  Vec2 lo = scenario.start.position, hi = scenario.start.position;
  auto grow = [&](const Vec2& p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  };
  grow(scenario.destination);
  for (const Obstacle& o : scenario.environment.obstacles) grow(o.position);
  for (const RectZone& w : scenario.walls) {
    grow(w.min);
    grow(w.max);
  }
  for (const RectZone& z : scenario.environment.no_fly_zones) {
    grow(z.min);
    grow(z.max);
  }
  const Vec2 margin{40, 40};
  OccupancyGrid grid(scenario.walls, lo - margin, hi + margin, params.grid_cell);
  grid.set_no_fly_zones(scenario.environment.no_fly_zones);

  SystemState truth;
  truth.operation = scenario.start;
  truth.environment = scenario.environment;
  truth.time = 0;

  EstimatedState est_prev;
  est_prev.position = scenario.start.position;
  est_prev.velocity = scenario.start.velocity;
  est_prev.heading = scenario.start.heading;
  est_prev.altitude = scenario.start.altitude;

  LongTermPolicy long_term;
  long_term.destination = scenario.destination;

  const LocalizationMode mode = scenario.localization == "imu_integration"
                                    ? LocalizationMode::imu_integration
                                    : LocalizationMode::gps;

  Trace trace;
  trace.scenario_name = scenario.name;
  trace.seed = seed;
  trace.config_hash = fnv1a(scenario.source_text,
                            fnv1a(spoofs.source_text, fnv1a(std::to_string(seed))));

  for (int step = 0; step < scenario.steps; ++step) {
    const double t = truth.time;
    SensorFrames frames = render_frames(truth, scenario.sensors, seed, rig);
    frames = apply_spoofs(std::move(frames), spoofs.specs, t);

    EstimatedState est = perceive(frames, mode, est_prev, params);
    if (slam_hook) {
      if (auto relocated = slam_hook(est, t)) est.position = *relocated;
    }

    auto [updated_long_term, policy] = plan(est, long_term, grid, params);
    long_term = updated_long_term;
    const ControlOutput u = control(policy, est, params);

    TraceStep record;
    record.time = t;
    record.truth = truth.operation;
    for (const Obstacle& o : truth.environment.obstacles) {
      record.obstacle_positions.push_back(o.position);
    }
    record.est_position = est.position;
    record.est_heading = est.heading;
    record.est_velocity = est.velocity;
    record.detections = est.detected_objects.size();
    record.policy = policy;
    record.control = u;
    for (const SpoofSpec& spec : spoofs.specs) {
      if (spec.active_at(t)) record.active_spoofs.push_back(spec.label);
    }
    record.mission_changed =
        est.mission_goal.has_value() &&
        (!est_prev.mission_goal.has_value() ||
         (*est.mission_goal - *est_prev.mission_goal).norm() > 1e-9);
    trace.steps.push_back(std::move(record));

    // Integrate the unicycle with the commanded outputs; the attacker never
    // touches this state directly.
    OperationState& op = truth.operation;
    op.position = op.position + heading_dir(op.heading) * (op.velocity * params.dt);
    const double new_velocity = std::max(0.0, op.velocity + u.linear_accel * params.dt);
    op.accel = (new_velocity - op.velocity) / params.dt;
    op.velocity = new_velocity;
    op.heading = wrap_heading(op.heading + u.yaw_rate * params.dt);
    op.angular_rate = u.yaw_rate;
    if (u.discrete == DiscreteAction::land) {
      op.altitude = std::max(0.0, op.altitude - params.descent_rate * params.dt);
    }
    for (Obstacle& obstacle : truth.environment.obstacles) {
      for (const VelocityScriptEntry& entry : obstacle.script) {
        if (entry.time >= t && entry.time < t + params.dt) obstacle.velocity = entry.velocity;
      }
      obstacle.position = obstacle.position + obstacle.velocity * params.dt;
    }
    truth.time += params.dt;

    est_prev = std::move(est);
  }
  trace.final_mission_goal = est_prev.mission_goal;

  SimulationResult result;
  result.report = classify_outcome(trace, scenario, spoofs, params);
  result.trace = std::move(trace);
  return result;
}

HazardReport classify_outcome(const Trace& trace, const Scenario& scenario,
                              const SpoofPlan& spoofs, const SimParams& params) {
  HazardReport report;
  if (trace.steps.empty()) return report;

  auto spoof_active_at = [&](double t, auto&& predicate) {
    for (const SpoofSpec& spec : spoofs.specs) {
      if (predicate(spec.transform) && spec.active_at(t)) return true;
    }
    return false;
  };
  auto spoof_active_by = [&](double t, auto&& predicate) {
    for (const SpoofSpec& spec : spoofs.specs) {
      if (predicate(spec.transform) && spec.t_start <= t) return true;
    }
    return false;
  };
  const double run_end = trace.steps.back().time;
  const bool any_spoof = std::any_of(
      spoofs.specs.begin(), spoofs.specs.end(),
      [&](const SpoofSpec& spec) { return spec.t_start <= run_end && spec.t_end > 0; });
  const bool mic_injected = std::any_of(
      spoofs.specs.begin(), spoofs.specs.end(), [](const SpoofSpec& spec) {
        return std::holds_alternative<MicInject>(spec.transform);
      });

  // Physical facts scanned from the trace.
  std::optional<int> collision_step;
  for (std::size_t i = 0; i < trace.steps.size() && !collision_step; ++i) {
    const TraceStep& step = trace.steps[i];
    for (std::size_t k = 0; k < step.obstacle_positions.size(); ++k) {
      const double radius = scenario.environment.obstacles[k].extent / 2;
      if ((step.obstacle_positions[k] - step.truth.position).norm() <
          radius + params.collision_margin) {
        collision_step = static_cast<int>(i);
        break;
      }
    }
  }

  std::optional<int> destabilized_step;
  int saturated_run = 0;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    if (std::abs(trace.steps[i].control.yaw_rate) >= 0.999 * params.omega_max) {
      if (++saturated_run >= params.destab_steps && !destabilized_step) {
        destabilized_step = static_cast<int>(i);
      }
    } else {
      saturated_run = 0;
    }
  }

  std::optional<int> landing_step;
  for (std::size_t i = 0; i < trace.steps.size() && !landing_step; ++i) {
    if (trace.steps[i].control.discrete == DiscreteAction::land) {
      landing_step = static_cast<int>(i);
    }
  }

  std::optional<int> violation_step;
  for (const TrafficSignal& signal : scenario.environment.signals) {
    if (signal.state != SignalState::red) continue;
    for (std::size_t i = 0; i + 1 < trace.steps.size() && !violation_step; ++i) {
      const TraceStep& a = trace.steps[i];
      const TraceStep& b = trace.steps[i + 1];
      const Vec2 dir = heading_dir(a.truth.heading);
      const double before = (a.truth.position - signal.position).dot(dir);
      const double after = (b.truth.position - signal.position).dot(dir);
      const Vec2 lateral = a.truth.position - signal.position;
      const double lateral_distance =
          std::abs(lateral.x * -dir.y + lateral.y * dir.x);
      if (before < 0 && after >= 0 && lateral_distance < 4.0 && a.truth.velocity > 0.5) {
        violation_step = static_cast<int>(i);
      }
    }
    if (violation_step) break;
  }

  std::optional<int> off_road_step;
  for (std::size_t i = 0; i < trace.steps.size() && !off_road_step; ++i) {
    for (const Lane& lane : scenario.environment.lanes) {
      double nearest = 1e18;
      for (std::size_t s = 0; s + 1 < lane.centerline.size(); ++s) {
        nearest = std::min(nearest,
                           point_segment_distance(trace.steps[i].truth.position,
                                                  lane.centerline[s], lane.centerline[s + 1]));
      }
      if (nearest > lane.half_width + 0.5) {
        off_road_step = static_cast<int>(i);
        break;
      }
    }
  }

  std::optional<int> brake_step;
  for (std::size_t i = 0; i < trace.steps.size() && !brake_step; ++i) {
    if (trace.steps[i].control.discrete == DiscreteAction::hard_brake &&
        spoof_active_at(trace.steps[i].time, is_env_transform)) {
      brake_step = static_cast<int>(i);
    }
  }

  const TraceStep& last = trace.steps.back();
  const double final_goal_distance = (last.truth.position - scenario.destination).norm();
  std::optional<int> wrong_destination_step;
  if (mic_injected && trace.final_mission_goal &&
      (*trace.final_mission_goal - scenario.destination).norm() > params.d_goal &&
      (last.truth.position - *trace.final_mission_goal).norm() < 2 * params.d_goal) {
    wrong_destination_step = static_cast<int>(trace.steps.size()) - 1;
  } else if (final_goal_distance > params.d_goal) {
    const bool position_spoofed = std::any_of(
        spoofs.specs.begin(), spoofs.specs.end(), [](const SpoofSpec& spec) {
          return std::holds_alternative<GpsShift>(spec.transform) ||
                 std::holds_alternative<ImuBias>(spec.transform);
        });
    if (position_spoofed) wrong_destination_step = static_cast<int>(trace.steps.size()) - 1;
  }

  // Severity precedence.
  struct Candidate {
    HazardOutcome outcome;
    std::optional<int> step;
  };
  const Candidate candidates[] = {
      {HazardOutcome::collision, collision_step},
      {HazardOutcome::destabilized, destabilized_step},
      {HazardOutcome::forced_landing, landing_step},
      {HazardOutcome::traffic_violation, violation_step},
      {HazardOutcome::off_road, off_road_step},
      {HazardOutcome::wrong_destination, wrong_destination_step},
      {HazardOutcome::emergency_stop, brake_step},
  };
  for (const Candidate& candidate : candidates) {
    if (candidate.step) {
      report.outcome = candidate.outcome;
      report.evidence.push_back(*candidate.step);
      break;
    }
  }
  if (report.outcome == HazardOutcome::none || !any_spoof) return report;

  const double consequence_time = trace.steps[report.evidence.front()].time;
  switch (report.outcome) {
    case HazardOutcome::destabilized:
      report.realized_path = AttackPath::AtkPath1;
      break;
    case HazardOutcome::forced_landing:
      report.realized_path = AttackPath::AtkPath2;
      break;
    case HazardOutcome::off_road:
      report.realized_path = AttackPath::AtkPath3;
      break;
    case HazardOutcome::wrong_destination:
      report.realized_path = mic_injected ? AttackPath::AtkPath5 : AttackPath::AtkPath3;
      break;
    case HazardOutcome::collision:
    case HazardOutcome::emergency_stop:
    case HazardOutcome::traffic_violation: {
      // Environment-state consequences: a preceding operation-state spoof
      // makes this the second round of a two-round attack.
      const bool op_spoofed = spoof_active_by(consequence_time, is_operation_transform);
      if (op_spoofed && spoofs.two_round_mode) {
        report.realized_path = *spoofs.two_round_mode == TwoRoundMode::roi
                                   ? AttackPath::AtkPath7
                                   : AttackPath::AtkPath6;
      } else if (spoof_active_by(consequence_time, is_env_transform)) {
        report.realized_path = AttackPath::AtkPath4;
      } else if (op_spoofed) {
        report.realized_path = AttackPath::AtkPath6;  // undeclared mode: blurring
      }
      break;
    }
    case HazardOutcome::none:
      break;
  }
  return report;
}

std::uint64_t trace_hash(const Trace& trace) {
  std::ostringstream os;
  for (const TraceStep& step : trace.steps) {
    os << std::fixed << std::setprecision(4) << step.time << '|' << step.truth.position.x << ','
       << step.truth.position.y << ',' << step.truth.heading << ',' << step.truth.velocity << '|';
    for (const Vec2& p : step.obstacle_positions) os << p.x << ':' << p.y << ';';
    os << '|' << step.est_position.x << ',' << step.est_position.y << '|'
       << step.control.linear_accel << ',' << step.control.yaw_rate << ','
       << to_string(step.control.discrete);
    os << '\n';
  }
  return fnv1a(os.str());
}

void write_trace(std::ostream& out, const Trace& trace, const HazardReport& report) {
  out << "# rvspoof trace v1\n";
  out << "# scenario=" << trace.scenario_name << " seed=" << trace.seed
      << " config_hash=" << std::hex << std::setw(16) << std::setfill('0') << trace.config_hash
      << std::dec << std::setfill(' ') << "\n";
  out << std::fixed << std::setprecision(4);
  for (const TraceStep& step : trace.steps) {
    out << "t=" << step.time << " truth=" << step.truth.position.x << ','
        << step.truth.position.y << ',' << step.truth.altitude << ',' << step.truth.heading << ','
        << step.truth.velocity << ',' << step.truth.angular_rate
        << " est=" << step.est_position.x << ',' << step.est_position.y << ','
        << step.est_heading << ',' << step.est_velocity << " det=" << step.detections
        << " policy=" << step.policy.target_speed << ',' << step.policy.steer_rate << ','
        << to_string(step.policy.discrete) << " u=" << step.control.linear_accel << ','
        << step.control.yaw_rate << ',' << to_string(step.control.discrete) << " spoofs=";
    if (step.active_spoofs.empty()) {
      out << '-';
    } else {
      for (std::size_t i = 0; i < step.active_spoofs.size(); ++i) {
        if (i) out << '|';
        out << step.active_spoofs[i];
      }
    }
    out << "\n";
  }
  out << "# outcome=" << to_string(report.outcome);
  if (report.realized_path) out << " path=" << to_string(*report.realized_path);
  if (!report.evidence.empty()) {
    out << " evidence=";
    for (std::size_t i = 0; i < report.evidence.size(); ++i) {
      if (i) out << ',';
      out << report.evidence[i];
    }
  }
  out << " trace_hash=" << std::hex << std::setw(16) << std::setfill('0') << trace_hash(trace)
      << std::dec << std::setfill(' ') << "\n";
}

}  // namespace rvspoof
