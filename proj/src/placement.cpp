#include "rvspoof/placement.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace rvspoof {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

VoxelKey voxel_of(const Vec3& p, double cell) {
  return {static_cast<std::int64_t>(std::floor(p.x / cell)),
          static_cast<std::int64_t>(std::floor(p.y / cell)),
          static_cast<std::int64_t>(std::floor(p.z / cell))};
}

// Running statistics of one cluster.
struct ClusterStats {
  std::size_t count = 0;
  Vec3 sum{};
  Vec3 lo{1e18, 1e18, 1e18};
  Vec3 hi{-1e18, -1e18, -1e18};

  void add(const Vec3& p) {
    ++count;
    sum = sum + p;
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  void merge(const ClusterStats& o) {
    count += o.count;
    sum = sum + o.sum;
    lo = {std::min(lo.x, o.lo.x), std::min(lo.y, o.lo.y), std::min(lo.z, o.lo.z)};
    hi = {std::max(hi.x, o.hi.x), std::max(hi.y, o.hi.y), std::max(hi.z, o.hi.z)};
  }
  DetectionBox to_box(const DetectorConfig& cfg) const {
    DetectionBox box;
    box.location = sum * (1.0 / static_cast<double>(count));
    box.size = hi - lo;
    box.heading = 0;
    box.confidence = std::min(1.0, static_cast<double>(count) / cfg.n_ref);
    box.class_tag = "cluster";
    return box;
  }
};

struct Dsu {
  std::vector<std::size_t> parent;

  explicit Dsu(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::vector<DetectionBox> finalize_boxes(std::vector<ClusterStats> clusters,
                                         const DetectorConfig& cfg) {
  std::vector<DetectionBox> boxes;
  for (const ClusterStats& stats : clusters) {
    if (stats.count == 0) continue;
    DetectionBox box = stats.to_box(cfg);
    if (box.confidence < cfg.min_confidence) continue;
    boxes.push_back(box);
  }
  std::sort(boxes.begin(), boxes.end(), [](const DetectionBox& a, const DetectionBox& b) {
    return std::tie(a.location.x, a.location.y, a.location.z) <
           std::tie(b.location.x, b.location.y, b.location.z);
  });
  return boxes;
}

const DetectionBox* nearest_box(const std::vector<DetectionBox>& boxes, const Vec3& point,
                                double max_radius) {
  const DetectionBox* best = nullptr;
  double best_d = max_radius * max_radius;
  for (const DetectionBox& box : boxes) {
    const double d = (box.location - point).squared_norm();
    if (d <= best_d) {
      best_d = d;
      best = &box;
    }
  }
  return best;
}

}  // namespace

double BoundsBox::lo(int axis) const {
  const double c = axis == 0 ? center.x : axis == 1 ? center.y : center.z;
  const double e = axis == 0 ? extents.x : axis == 1 ? extents.y : extents.z;
  return c - e / 2;
}

double BoundsBox::hi(int axis) const {
  const double c = axis == 0 ? center.x : axis == 1 ? center.y : center.z;
  const double e = axis == 0 ? extents.x : axis == 1 ? extents.y : extents.z;
  return c + e / 2;
}

Placement BoundsBox::clamp(const Placement& s) const {
  Placement out = s;
  out.x = std::clamp(s.x, lo(0), hi(0));
  out.y = std::clamp(s.y, lo(1), hi(1));
  out.z = std::clamp(s.z, lo(2), hi(2));
  out.alpha = std::clamp(s.alpha, -kPi, kPi);
  out.beta = std::clamp(s.beta, -kPi, kPi);
  out.gamma = std::clamp(s.gamma, -kPi, kPi);
  return out;
}

bool BoundsBox::contains(const Placement& s) const {
  const double eps = 1e-9;
  return s.x >= lo(0) - eps && s.x <= hi(0) + eps && s.y >= lo(1) - eps && s.y <= hi(1) + eps &&
         s.z >= lo(2) - eps && s.z <= hi(2) + eps && std::abs(s.alpha) <= kPi + eps &&
         std::abs(s.beta) <= kPi + eps && std::abs(s.gamma) <= kPi + eps;
}

double BoundsBox::diagonal() const { return std::sqrt(extents.squared_norm()); }

AdversarialObject default_adversarial_object() {
  AdversarialObject obj;
  auto& pts = obj.template_points.points;
  // Body: 3x3x2 block.
  for (double x : {-0.05, 0.0, 0.05}) {
    for (double y : {-0.05, 0.0, 0.05}) {
      for (double z : {-0.05, 0.05}) pts.push_back({x, y, z});
    }
  }
  // Four rotors on masts above the body: hub plus four pads each.
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const double cx = 0.2 * sx, cy = 0.2 * sy;
      pts.push_back({cx, cy, 0.25});
      pts.push_back({cx + 0.05, cy, 0.25});
      pts.push_back({cx - 0.05, cy, 0.25});
      pts.push_back({cx, cy + 0.05, 0.25});
      pts.push_back({cx, cy - 0.05, 0.25});
    }
  }
  // Landing skids.
  pts.push_back({0, 0.1, -0.25});
  pts.push_back({0, -0.1, -0.25});
  return obj;  // 40 points
}

PointCloud transform_object(const AdversarialObject& obj, const Placement& s) {
  const double ca = std::cos(s.alpha), sa = std::sin(s.alpha);
  const double cb = std::cos(s.beta), sb = std::sin(s.beta);
  const double cg = std::cos(s.gamma), sg = std::sin(s.gamma);
  // R = Rz(alpha) * Ry(beta) * Rx(gamma)
  const double r00 = ca * cb;
  const double r01 = ca * sb * sg - sa * cg;
  const double r02 = ca * sb * cg + sa * sg;
  const double r10 = sa * cb;
  const double r11 = sa * sb * sg + ca * cg;
  const double r12 = sa * sb * cg - ca * sg;
  const double r20 = -sb;
  const double r21 = cb * sg;
  const double r22 = cb * cg;

  PointCloud out;
  out.points.reserve(obj.template_points.points.size());
  for (const Vec3& p : obj.template_points.points) {
    out.points.push_back({r00 * p.x + r01 * p.y + r02 * p.z + s.x,
                          r10 * p.x + r11 * p.y + r12 * p.z + s.y,
                          r20 * p.x + r21 * p.y + r22 * p.z + s.z});
  }
  return out;
}

std::vector<DetectionBox> reference_detector(const PointCloud& cloud, const DetectorConfig& cfg) {
  if (cloud.points.empty()) return {};

  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> key_index;
  std::vector<VoxelKey> keys;
  std::vector<ClusterStats> voxel_stats;
  for (const Vec3& p : cloud.points) {
    const VoxelKey key = voxel_of(p, cfg.cell_size);
    auto [it, inserted] = key_index.emplace(key, keys.size());
    if (inserted) {
      keys.push_back(key);
      voxel_stats.emplace_back();
    }
    voxel_stats[it->second].add(p);
  }

  Dsu dsu(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    // Scanning half the 26-neighborhood covers every adjacent pair once.
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          if (std::make_tuple(dx, dy, dz) <= std::make_tuple(0, 0, 0)) continue;
          auto it = key_index.find({keys[i].x + dx, keys[i].y + dy, keys[i].z + dz});
          if (it != key_index.end()) dsu.unite(i, it->second);
        }
      }
    }
  }

  std::vector<ClusterStats> clusters(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) clusters[dsu.find(i)].merge(voxel_stats[i]);
  return finalize_boxes(std::move(clusters), cfg);
}

Detector make_reference_detector(const DetectorConfig& cfg) {
  return [cfg](const PointCloud& cloud) { return reference_detector(cloud, cfg); };
}

// Static scene clustering cached once; per-evaluation work touches only the
// injected object's voxels.
struct LossEvaluator::SceneCache {
  DetectorConfig cfg;
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> voxel_cluster;  // voxel -> cluster id
  std::vector<ClusterStats> cluster_stats;

  explicit SceneCache(const DetectorConfig& detector_cfg, const PointCloud& scene)
      : cfg(detector_cfg) {
    std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> key_index;
    std::vector<VoxelKey> keys;
    std::vector<ClusterStats> voxel_stats;
    for (const Vec3& p : scene.points) {
      const VoxelKey key = voxel_of(p, cfg.cell_size);
      auto [it, inserted] = key_index.emplace(key, keys.size());
      if (inserted) {
        keys.push_back(key);
        voxel_stats.emplace_back();
      }
      voxel_stats[it->second].add(p);
    }
    Dsu dsu(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dz = -1; dz <= 1; ++dz) {
            if (std::make_tuple(dx, dy, dz) <= std::make_tuple(0, 0, 0)) continue;
            auto it = key_index.find({keys[i].x + dx, keys[i].y + dy, keys[i].z + dz});
            if (it != key_index.end()) dsu.unite(i, it->second);
          }
        }
      }
    }
    std::unordered_map<std::size_t, std::size_t> root_to_cluster;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const std::size_t root = dsu.find(i);
      auto [it, inserted] = root_to_cluster.emplace(root, cluster_stats.size());
      if (inserted) cluster_stats.emplace_back();
      cluster_stats[it->second].merge(voxel_stats[i]);
      voxel_cluster.emplace(keys[i], it->second);
    }
  }

  std::vector<DetectionBox> detect_with(const PointCloud& injected) const {
    // Injected voxels get ids after the scene clusters in a small DSU.
    std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> obj_index;
    std::vector<VoxelKey> obj_keys;
    std::vector<ClusterStats> obj_stats;
    for (const Vec3& p : injected.points) {
      const VoxelKey key = voxel_of(p, cfg.cell_size);
      auto [it, inserted] = obj_index.emplace(key, obj_keys.size());
      if (inserted) {
        obj_keys.push_back(key);
        obj_stats.emplace_back();
      }
      obj_stats[it->second].add(p);
    }

    const std::size_t n_scene = cluster_stats.size();
    Dsu dsu(n_scene + obj_keys.size());
    for (std::size_t i = 0; i < obj_keys.size(); ++i) {
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dz = -1; dz <= 1; ++dz) {
            const VoxelKey neighbor{obj_keys[i].x + dx, obj_keys[i].y + dy, obj_keys[i].z + dz};
            auto scene_it = voxel_cluster.find(neighbor);
            if (scene_it != voxel_cluster.end()) dsu.unite(n_scene + i, scene_it->second);
            if (dx == 0 && dy == 0 && dz == 0) continue;
            auto obj_it = obj_index.find(neighbor);
            if (obj_it != obj_index.end()) dsu.unite(n_scene + i, n_scene + obj_it->second);
          }
        }
      }
    }

    std::vector<ClusterStats> merged(n_scene + obj_keys.size());
    for (std::size_t c = 0; c < n_scene; ++c) merged[dsu.find(c)].merge(cluster_stats[c]);
    for (std::size_t i = 0; i < obj_keys.size(); ++i) {
      merged[dsu.find(n_scene + i)].merge(obj_stats[i]);
    }
    return finalize_boxes(std::move(merged), cfg);
  }
};

LossEvaluator::LossEvaluator(Detector detector, PointCloud scene, AdversarialObject object,
                             TargetMatcher target, Objective objective, double vanished_cap)
    : detector_(std::move(detector)),
      scene_(std::move(scene)),
      object_(std::move(object)),
      objective_(objective),
      vanished_cap_(vanished_cap) {
  auto clean = detector_(scene_);
  const DetectionBox* box = nearest_box(clean, target.point, target.max_radius);
  if (box == nullptr) {
    throw TargetNotFoundError("target matcher selects no box on the clean cloud");
  }
  clean_target_ = *box;
}

LossEvaluator::LossEvaluator(const DetectorConfig& cfg, PointCloud scene,
                             AdversarialObject object, TargetMatcher target, Objective objective,
                             double vanished_cap)
    : object_(std::move(object)),
      objective_(objective),
      vanished_cap_(vanished_cap),
      cache_(std::make_shared<SceneCache>(cfg, scene)) {
  scene_ = std::move(scene);
  auto clean = reference_detector(scene_, cfg);
  const DetectionBox* box = nearest_box(clean, target.point, target.max_radius);
  if (box == nullptr) {
    throw TargetNotFoundError("target matcher selects no box on the clean cloud");
  }
  clean_target_ = *box;
}

double LossEvaluator::score(const std::vector<DetectionBox>& boxes) const {
  const DetectionBox* matched =
      nearest_box(boxes, clean_target_.location, std::numeric_limits<double>::infinity());
  switch (objective_) {
    case Objective::displace_location: {
      if (matched == nullptr) return vanished_cap_;
      const Vec3 d = matched->location - clean_target_.location;
      return d.squared_norm() / 3.0;  // mean squared difference over coordinates
    }
    case Objective::suppress_confidence: {
      const double adv = matched == nullptr ? 0.0 : matched->confidence;
      return clean_target_.confidence - adv;
    }
    case Objective::boost_confidence: {
      const double adv = matched == nullptr ? 0.0 : matched->confidence;
      return adv - clean_target_.confidence;
    }
  }
  return 0;
}

double LossEvaluator::operator()(const Placement& s) const {
  PointCloud injected = transform_object(object_, s);
  if (cache_) return score(cache_->detect_with(injected));
  PointCloud combined = scene_;
  combined.points.insert(combined.points.end(), injected.points.begin(), injected.points.end());
  return score(detector_(combined));
}

double loss(const Detector& detector, const PointCloud& scene, const AdversarialObject& obj,
            const Placement& s, const TargetMatcher& target, Objective objective,
            double vanished_cap) {
  LossEvaluator eval(detector, scene, obj, target, objective, vanished_cap);
  return eval(s);
}

std::array<double, 6> estimate_gradient(const LossFn& loss_fn, const Placement& s,
                                        const OptimizerConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::array<double, 6> grad{};
  int accepted = 0;
  int attempts = 0;
  const std::array<double, 6> base = s.as_array();
  while (accepted < cfg.samples && attempts < cfg.max_sample_attempts) {
    ++attempts;
    std::array<double, 6> u;
    for (double& v : u) v = uniform(rng);
    std::array<double, 6> perturbed;
    for (int k = 0; k < 6; ++k) perturbed[k] = base[k] + cfg.epsilon * u[k];
    const double sample_loss = loss_fn(Placement::from_array(perturbed));
    if (sample_loss > cfg.threshold) {
      ++accepted;
      for (int k = 0; k < 6; ++k) grad[k] += (sample_loss / cfg.epsilon) * u[k];
    }
  }
  if (accepted == 0) {
    throw NoAcceptedSamplesError("no sample exceeded the loss threshold after " +
                                 std::to_string(attempts) + " draws");
  }
  for (double& g : grad) g /= static_cast<double>(cfg.samples);
  return grad;
}

namespace {

OptimizationResult run_sign_ascent(const LossEvaluator& eval, const OptimizerConfig& cfg) {
  LossFn loss_fn = [&eval](const Placement& s) { return eval(s); };

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::array<double, 6> init;
  for (double& v : init) v = uniform(rng);
  Placement s = cfg.bounds.clamp(Placement::from_array(init));

  OptimizationResult result;
  result.best_placement = s;
  result.best_loss = loss_fn(s);
  result.iterates.push_back(s);
  result.history.reserve(static_cast<std::size_t>(std::max(cfg.iterations, 0)));

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    try {
      const std::array<double, 6> grad = estimate_gradient(loss_fn, s, cfg, rng);
      std::array<double, 6> next = s.as_array();
      for (int k = 0; k < 6; ++k) {
        const double step = grad[k] > 0 ? 1.0 : (grad[k] < 0 ? -1.0 : 0.0);
        next[k] += step * cfg.epsilon;
      }
      s = cfg.bounds.clamp(Placement::from_array(next));
      const double current = loss_fn(s);
      if (current > result.best_loss) {
        result.best_loss = current;
        result.best_placement = s;
      }
    } catch (const NoAcceptedSamplesError&) {
      ++result.gated_out_iterations;  // zero-update step
    }
    result.iterates.push_back(s);
    result.history.push_back(result.best_loss);
  }
  return result;
}

OracleResult run_grid_sweep(const LossEvaluator& eval, const BoundsBox& bounds, double grid_step,
                            double angle_step) {
  auto axis_values = [&](int axis) {
    std::vector<double> values;
    const double lo = bounds.lo(axis), hi = bounds.hi(axis);
    for (double v = lo; v <= hi + 1e-9; v += grid_step) {
      values.push_back(v);
      if (grid_step <= 0) break;
    }
    if (values.empty()) values.push_back((lo + hi) / 2);
    return values;
  };
  std::vector<double> angles;
  if (angle_step > 0 && angle_step < 2 * kPi) {
    for (double a = -kPi; a < kPi - 1e-9; a += angle_step) angles.push_back(a);
  } else {
    angles.push_back(0.0);
  }

  OracleResult result;
  result.best_loss = -std::numeric_limits<double>::infinity();
  for (double x : axis_values(0)) {
    for (double y : axis_values(1)) {
      for (double z : axis_values(2)) {
        for (double alpha : angles) {
          for (double beta : angles) {
            for (double gamma : angles) {
              const Placement s{x, y, z, alpha, beta, gamma};
              const double value = eval(s);
              ++result.evaluations;
              if (value > result.best_loss) {
                result.best_loss = value;
                result.best_placement = s;
              }
            }
          }
        }
      }
    }
  }
  return result;
}

}  // namespace

OptimizationResult optimize_placement(const Detector& detector, const PointCloud& scene,
                                      const AdversarialObject& obj, const TargetMatcher& target,
                                      const OptimizerConfig& cfg) {
  LossEvaluator eval(detector, scene, obj, target, cfg.objective,
                     cfg.bounds.diagonal() * cfg.bounds.diagonal());
  return run_sign_ascent(eval, cfg);
}

OptimizationResult optimize_placement(const DetectorConfig& detector_cfg, const PointCloud& scene,
                                      const AdversarialObject& obj, const TargetMatcher& target,
                                      const OptimizerConfig& cfg) {
  LossEvaluator eval(detector_cfg, scene, obj, target, cfg.objective,
                     cfg.bounds.diagonal() * cfg.bounds.diagonal());
  return run_sign_ascent(eval, cfg);
}

OracleResult brute_force_oracle(const Detector& detector, const PointCloud& scene,
                                const AdversarialObject& obj, const TargetMatcher& target,
                                const BoundsBox& bounds, double grid_step, double angle_step,
                                Objective objective) {
  LossEvaluator eval(detector, scene, obj, target, objective,
                     bounds.diagonal() * bounds.diagonal());
  return run_grid_sweep(eval, bounds, grid_step, angle_step);
}

OracleResult brute_force_oracle(const DetectorConfig& detector_cfg, const PointCloud& scene,
                                const AdversarialObject& obj, const TargetMatcher& target,
                                const BoundsBox& bounds, double grid_step, double angle_step,
                                Objective objective) {
  LossEvaluator eval(detector_cfg, scene, obj, target, objective,
                     bounds.diagonal() * bounds.diagonal());
  return run_grid_sweep(eval, bounds, grid_step, angle_step);
}

PlacementScene load_placement_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file: " + path);
  PlacementScene scene;
  bool have_object = false;
  bool have_target = false;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream is(line);
    std::string tag;
    if (!(is >> tag) || tag[0] == '#') continue;
    if (tag == "point") {
      Vec3 p;
      is >> p.x >> p.y >> p.z;
      scene.cloud.points.push_back(p);
    } else if (tag == "object") {
      Vec3 p;
      is >> p.x >> p.y >> p.z;
      scene.object.template_points.points.push_back(p);
      have_object = true;
    } else if (tag == "target") {
      is >> scene.target.point.x >> scene.target.point.y >> scene.target.point.z;
      have_target = true;
    } else if (tag == "bounds") {
      is >> scene.bounds.center.x >> scene.bounds.center.y >> scene.bounds.center.z >>
          scene.bounds.extents.x >> scene.bounds.extents.y >> scene.bounds.extents.z;
    } else if (tag == "detector") {
      is >> scene.detector.cell_size >> scene.detector.n_ref >> scene.detector.min_confidence;
    } else {
      throw std::runtime_error("scene line " + std::to_string(line_number) +
                               ": unknown directive '" + tag + "'");
    }
    if (is.fail()) {
      throw std::runtime_error("scene line " + std::to_string(line_number) + ": malformed fields");
    }
  }
  if (!have_object) scene.object = default_adversarial_object();
  if (!have_target) throw std::runtime_error("scene file has no target directive");
  return scene;
}

OptimizerConfig load_optimizer_config(const std::string& path, const PlacementScene& scene) {
  OptimizerConfig cfg;
  cfg.bounds = scene.bounds;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open optimizer config: " + path);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream is(line);
    std::string tag;
    if (!(is >> tag) || tag[0] == '#') continue;
    if (tag == "iterations") is >> cfg.iterations;
    else if (tag == "samples") is >> cfg.samples;
    else if (tag == "epsilon") is >> cfg.epsilon;
    else if (tag == "theta") is >> cfg.threshold;
    else if (tag == "max_attempts") is >> cfg.max_sample_attempts;
    else if (tag == "seed") is >> cfg.seed;
    else if (tag == "objective") {
      std::string name;
      is >> name;
      if (name == "displace") cfg.objective = Objective::displace_location;
      else if (name == "suppress") cfg.objective = Objective::suppress_confidence;
      else if (name == "boost") cfg.objective = Objective::boost_confidence;
      else throw std::runtime_error("config line " + std::to_string(line_number) +
                                    ": unknown objective '" + name + "'");
    } else {
      throw std::runtime_error("config line " + std::to_string(line_number) +
                               ": unknown directive '" + tag + "'");
    }
    if (is.fail()) {
      throw std::runtime_error("config line " + std::to_string(line_number) +
                               ": malformed fields");
    }
  }
  if (cfg.iterations < 0 || cfg.samples < 1 || cfg.epsilon <= 0 ||
      cfg.max_sample_attempts < cfg.samples) {
    throw std::runtime_error("optimizer config violates N >= 0, m >= 1, eps > 0, "
                             "max_sample_attempts >= m");
  }
  return cfg;
}

}  // namespace rvspoof
