// Adversarial object placement against a black-box point-cloud detector:
// rejection-gated zeroth-order gradient estimation with sign-step projected
// updates over a 6-DoF pose, plus an exhaustive grid oracle for verification.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rvspoof {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double squared_norm() const { return x * x + y * y + z * z; }
};

struct PointCloud {
  std::vector<Vec3> points;
};

// 6-DoF pose: translation plus Z-Y-X Euler angles (rotate about X by gamma,
// then Y by beta, then Z by alpha; translate last).
struct Placement {
  double x = 0, y = 0, z = 0;
  double alpha = 0, beta = 0, gamma = 0;

  std::array<double, 6> as_array() const { return {x, y, z, alpha, beta, gamma}; }
  static Placement from_array(const std::array<double, 6>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5]};
  }
};

struct AdversarialObject {
  PointCloud template_points;  // object frame
};

// A drone-shaped cluster of 40 points, the default injected object.
AdversarialObject default_adversarial_object();

struct DetectionBox {
  Vec3 location;   // cluster centroid
  Vec3 size;       // per-axis extents
  double heading = 0;
  double confidence = 0;
  std::string class_tag;
};

struct DetectorConfig {
  double cell_size = 0.5;      // voxel edge length
  double n_ref = 50;           // points for full confidence
  double min_confidence = 0.2; // boxes below are filtered
};

using Detector = std::function<std::vector<DetectionBox>(const PointCloud&)>;

// Voxel-grid connected-component clustering (26-connectivity). Location is
// the cluster centroid, size the per-axis extents, heading fixed at 0,
// confidence min(1, n/n_ref); clusters under min_confidence are dropped.
std::vector<DetectionBox> reference_detector(const PointCloud& cloud, const DetectorConfig& cfg);
Detector make_reference_detector(const DetectorConfig& cfg = {});

struct BoundsBox {
  Vec3 center;
  Vec3 extents;  // full side lengths

  double lo(int axis) const;
  double hi(int axis) const;
  // Translation clamped to the box, angles to [-pi, pi].
  Placement clamp(const Placement& s) const;
  bool contains(const Placement& s) const;
  double diagonal() const;
};

enum class Objective : std::uint8_t {
  displace_location,
  suppress_confidence,
  boost_confidence,
};

// Selects the clean box nearest to `point` (within `max_radius`).
struct TargetMatcher {
  Vec3 point;
  double max_radius = 1e9;
};

struct TargetNotFoundError : std::runtime_error {
  explicit TargetNotFoundError(const std::string& what) : std::runtime_error(what) {}
};
struct NoAcceptedSamplesError : std::runtime_error {
  explicit NoAcceptedSamplesError(const std::string& what) : std::runtime_error(what) {}
};

struct OptimizerConfig {
  int iterations = 50;          // N
  int samples = 20;             // m
  double epsilon = 0.1;         // smoothing factor and step size
  double threshold = 0.0;       // loss gate theta
  BoundsBox bounds{{0, 0, 0}, {3, 3, 1}};
  int max_sample_attempts = 400;
  std::uint64_t seed = 0;
  Objective objective = Objective::displace_location;
};

// Rigid transform of the template: rotation (gamma about X, beta about Y,
// alpha about Z, in that order) then translation.
PointCloud transform_object(const AdversarialObject& obj, const Placement& s);

// Scene-loss evaluation with the clean detection precomputed once. The
// DetectorConfig constructor additionally caches the static scene's voxel
// clustering and only folds the injected object in per evaluation; it is
// semantically identical to running reference_detector on the combined
// cloud (covered by an equivalence test).
class LossEvaluator {
 public:
  LossEvaluator(Detector detector, PointCloud scene, AdversarialObject object,
                TargetMatcher target, Objective objective, double vanished_cap);
  LossEvaluator(const DetectorConfig& cfg, PointCloud scene, AdversarialObject object,
                TargetMatcher target, Objective objective, double vanished_cap);

  double operator()(const Placement& s) const;
  const DetectionBox& clean_target() const { return clean_target_; }

 private:
  struct SceneCache;

  double score(const std::vector<DetectionBox>& boxes) const;

  Detector detector_;
  PointCloud scene_;
  AdversarialObject object_;
  Objective objective_;
  DetectionBox clean_target_;
  double vanished_cap_;
  std::shared_ptr<const SceneCache> cache_;  // set on the fast path
};

// One-shot loss. Displacement objective: mean over the three coordinates of
// the squared difference between the matched and clean target locations;
// a vanished target costs the documented cap (bounds diagonal squared).
// Confidence objectives: clean minus adversarial score (suppress) or its
// negation (boost).
double loss(const Detector& detector, const PointCloud& scene, const AdversarialObject& obj,
            const Placement& s, const TargetMatcher& target, Objective objective,
            double vanished_cap);

using LossFn = std::function<double(const Placement&)>;

// Gated estimator: draws u with coordinates uniform on [-1, 1], evaluates
// loss(s + eps*u), and accumulates (loss/eps)*u only when loss > theta.
// Stops at cfg.samples accepted draws or cfg.max_sample_attempts total;
// the sum is divided by cfg.samples. Throws NoAcceptedSamples when the gate
// rejects every draw.
std::array<double, 6> estimate_gradient(const LossFn& loss_fn, const Placement& s,
                                        const OptimizerConfig& cfg, std::mt19937_64& rng);

struct OptimizationResult {
  Placement best_placement;
  double best_loss = 0;
  std::vector<double> history;   // best-so-far loss, one entry per iteration
  std::vector<Placement> iterates;  // initial placement plus one per iteration
  int gated_out_iterations = 0;  // iterations that saw no accepted samples
};

// Sign-step projected ascent: s <- clamp(s + sign(grad) * eps), N times,
// starting from a random placement with coordinates uniform on [-1, 1]
// (clamped into bounds). Iterations with no accepted samples leave s
// unchanged. Returns the best placement encountered.
OptimizationResult optimize_placement(const Detector& detector, const PointCloud& scene,
                                      const AdversarialObject& obj, const TargetMatcher& target,
                                      const OptimizerConfig& cfg);
// Same search through the cached fast evaluator.
OptimizationResult optimize_placement(const DetectorConfig& detector_cfg, const PointCloud& scene,
                                      const AdversarialObject& obj, const TargetMatcher& target,
                                      const OptimizerConfig& cfg);

struct OracleResult {
  Placement best_placement;
  double best_loss = 0;
  std::size_t evaluations = 0;
};

// Exhaustive evaluation over the translation grid x angle grid inside
// bounds; angles sweep [-pi, pi) at angle_step (a single zero angle when
// angle_step <= 0 or exceeds the sweep).
OracleResult brute_force_oracle(const Detector& detector, const PointCloud& scene,
                                const AdversarialObject& obj, const TargetMatcher& target,
                                const BoundsBox& bounds, double grid_step, double angle_step,
                                Objective objective = Objective::displace_location);
OracleResult brute_force_oracle(const DetectorConfig& detector_cfg, const PointCloud& scene,
                                const AdversarialObject& obj, const TargetMatcher& target,
                                const BoundsBox& bounds, double grid_step, double angle_step,
                                Objective objective = Objective::displace_location);

// Scene file: `point x y z`, `object x y z`, `target x y z`,
// `bounds cx cy cz ex ey ez`, optional `detector cell n_ref c_min`.
struct PlacementScene {
  PointCloud cloud;
  AdversarialObject object;
  TargetMatcher target;
  BoundsBox bounds{{0, 0, 0}, {3, 3, 1}};
  DetectorConfig detector;
};

PlacementScene load_placement_scene(const std::string& path);
OptimizerConfig load_optimizer_config(const std::string& path, const PlacementScene& scene);

}  // namespace rvspoof
