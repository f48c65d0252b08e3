// Keypoint/descriptor loop-closure detection and the feature-injection
// attack that forces a false closure and relocalizes the vehicle.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rvspoof {

// Opaque 256-bit binary descriptor compared by Hamming distance.
struct Descriptor {
  std::array<std::uint64_t, 4> words{};

  int distance(const Descriptor& other) const;
  std::string to_hex() const;
  static Descriptor from_hex(const std::string& hex);
  bool operator==(const Descriptor&) const = default;
};

struct Keypoint {
  double x = 0, y = 0;     // pixels
  double angle = 0;        // radians
  double scale = 1;        // > 0
  Descriptor descriptor;
};

struct FramePose {
  double x = 0, y = 0;  // meters
  double heading = 0;   // radians
};

struct Keyframe {
  int id = 0;
  FramePose pose;
  std::vector<Keypoint> keypoints;
};

using MapDatabase = std::vector<Keyframe>;

struct MatchPair {
  std::size_t index_a = 0;
  std::size_t index_b = 0;
  int distance = 0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;                       // mutual nearest neighbours
  std::map<int, std::vector<std::size_t>> groups;     // angle bin -> pair indices
  int similarity = 0;   // pairs in bins holding >= 3 pairs
  int consistent_groups = 0;  // bins holding >= 3 pairs
};

struct LoopClosureConfig {
  int descriptor_threshold = 40;      // tau_d, bits
  double scale_ratio_tolerance = 1.3; // rho
  double angle_bin_width = 3.14159265358979323846 / 12;  // w
  int min_matches = 34;               // M_min
  int min_groups = 3;                 // G_min
};

struct BudgetExhaustedError : std::runtime_error {
  BudgetExhaustedError(const std::string& what, int achieved)
      : std::runtime_error(what), achieved_similarity(achieved) {}
  int achieved_similarity;
};

// Mutual-nearest-neighbour descriptor pairs filtered by distance and scale
// ratio, grouped by relative angle (b minus a) into bins of width w;
// similarity counts pairs in bins holding at least three pairs.
MatchResult match_keyframes(const Keyframe& a, const Keyframe& b, const LoopClosureConfig& cfg);

struct ClosureHit {
  int keyframe_id = 0;
  MatchResult match;
};

// Best database frame by similarity (ties to the lowest id); a hit needs
// similarity >= min_matches and consistent groups >= min_groups.
std::optional<ClosureHit> detect_loop_closure(const Keyframe& current, const MapDatabase& db,
                                              const LoopClosureConfig& cfg);

struct InjectionResult {
  Keyframe modified;
  std::vector<Keypoint> injected;
};

// Greedily copies unmatched target keypoints into `current` (descriptor and
// scale preserved; angles offset to land in three rotating relative-angle
// bins), stopping once detection against `target` fires. Throws
// BudgetExhausted (with the achieved similarity) when the budget runs out.
InjectionResult inject_features(const Keyframe& current, const Keyframe& target,
                                const LoopClosureConfig& cfg, int budget);

// A detected closure snaps the estimate to the matched frame's pose.
FramePose relocalize(const FramePose& estimated, const Keyframe& target);

// Fixture file: `current <id>`, `target <id>`, `frame <id> pose <x> <y> <h>`
// headers with one `kp <x> <y> <angle> <scale> <hex64>` line per keypoint.
struct LoopClosureFixture {
  Keyframe current;
  int target_id = 0;
  MapDatabase database;  // every frame except the current one
};

LoopClosureFixture load_loop_closure_fixture(const std::string& path);

}  // namespace rvspoof
