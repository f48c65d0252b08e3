#include "rvspoof/loop_closure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace rvspoof {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) {
  while (a <= -kPi) a += 2 * kPi;
  while (a > kPi) a -= 2 * kPi;
  return a;
}

// Nearest neighbour of `kp` among `candidates` by descriptor distance,
// ties broken by the lowest index.
std::size_t nearest_index(const Keypoint& kp, const std::vector<Keypoint>& candidates) {
  std::size_t best = 0;
  int best_distance = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const int d = kp.descriptor.distance(candidates[i].descriptor);
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

int Descriptor::distance(const Descriptor& other) const {
  int bits = 0;
  for (int i = 0; i < 4; ++i) bits += std::popcount(words[i] ^ other.words[i]);
  return bits;
}

std::string Descriptor::to_hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (int w = 3; w >= 0; --w) {
    for (int shift = 60; shift >= 0; shift -= 4) {
      out.push_back(digits[(words[w] >> shift) & 0xF]);
    }
  }
  return out;
}

Descriptor Descriptor::from_hex(const std::string& hex) {
  if (hex.size() != 64) throw std::invalid_argument("descriptor hex must be 64 chars");
  Descriptor d;
  for (int w = 3; w >= 0; --w) {
    std::uint64_t value = 0;
    for (int c = 0; c < 16; ++c) {
      const char ch = hex[(3 - w) * 16 + c];
      value <<= 4;
      if (ch >= '0' && ch <= '9') value |= static_cast<std::uint64_t>(ch - '0');
      else if (ch >= 'a' && ch <= 'f') value |= static_cast<std::uint64_t>(ch - 'a' + 10);
      else if (ch >= 'A' && ch <= 'F') value |= static_cast<std::uint64_t>(ch - 'A' + 10);
      else throw std::invalid_argument("bad descriptor hex digit");
    }
    d.words[w] = value;
  }
  return d;
}

MatchResult match_keyframes(const Keyframe& a, const Keyframe& b, const LoopClosureConfig& cfg) {
  MatchResult result;
  if (a.keypoints.empty() || b.keypoints.empty()) return result;

  for (std::size_t i = 0; i < a.keypoints.size(); ++i) {
    const std::size_t j = nearest_index(a.keypoints[i], b.keypoints);
    if (nearest_index(b.keypoints[j], a.keypoints) != i) continue;  // not mutual
    const int d = a.keypoints[i].descriptor.distance(b.keypoints[j].descriptor);
    if (d > cfg.descriptor_threshold) continue;
    const double ratio = b.keypoints[j].scale / a.keypoints[i].scale;
    if (ratio > cfg.scale_ratio_tolerance || ratio < 1.0 / cfg.scale_ratio_tolerance) continue;
    result.pairs.push_back({i, j, d});
  }

  for (std::size_t p = 0; p < result.pairs.size(); ++p) {
    const MatchPair& pair = result.pairs[p];
    const double rel =
        wrap_angle(b.keypoints[pair.index_b].angle - a.keypoints[pair.index_a].angle);
    const int bin = static_cast<int>(std::floor((rel + kPi) / cfg.angle_bin_width));
    result.groups[bin].push_back(p);
  }
  for (const auto& [bin, members] : result.groups) {
    if (members.size() >= 3) {
      ++result.consistent_groups;
      result.similarity += static_cast<int>(members.size());
    }
  }
  return result;
}

std::optional<ClosureHit> detect_loop_closure(const Keyframe& current, const MapDatabase& db,
                                              const LoopClosureConfig& cfg) {
  std::optional<ClosureHit> best;
  for (const Keyframe& frame : db) {
    MatchResult match = match_keyframes(current, frame, cfg);
    if (!best || match.similarity > best->match.similarity ||
        (match.similarity == best->match.similarity && frame.id < best->keyframe_id)) {
      best = ClosureHit{frame.id, std::move(match)};
    }
  }
  if (!best) return std::nullopt;
  if (best->match.similarity < cfg.min_matches ||
      best->match.consistent_groups < cfg.min_groups) {
    return std::nullopt;
  }
  return best;
}

InjectionResult inject_features(const Keyframe& current, const Keyframe& target,
                                const LoopClosureConfig& cfg, int budget) {
  InjectionResult result;
  result.modified = current;

  auto fires = [&](const Keyframe& frame) {
    MatchResult match = match_keyframes(frame, target, cfg);
    return match.similarity >= cfg.min_matches && match.consistent_groups >= cfg.min_groups;
  };
  if (fires(result.modified)) return result;

  // Three relative-angle offsets, one bin apart from each other, cycled so
  // injected pairs spread over exactly min_groups-many bins.
  const std::array<int, 3> bins = {6, 12, 18};
  std::array<double, 3> offsets;
  for (int k = 0; k < 3; ++k) offsets[k] = -kPi + cfg.angle_bin_width * (bins[k] + 0.5);

  // Target keypoints already matched stay untouched; duplicating their
  // descriptors would steal the existing pairs.
  std::vector<bool> matched(target.keypoints.size(), false);
  for (const MatchPair& pair : match_keyframes(result.modified, target, cfg).pairs) {
    matched[pair.index_b] = true;
  }

  int used = 0;
  int cycle = 0;
  for (std::size_t j = 0; j < target.keypoints.size() && used < budget; ++j) {
    if (matched[j]) continue;
    Keypoint copy = target.keypoints[j];
    copy.angle = wrap_angle(target.keypoints[j].angle - offsets[cycle % 3]);
    ++cycle;
    result.modified.keypoints.push_back(copy);
    result.injected.push_back(copy);
    ++used;
    if (fires(result.modified)) return result;
  }
  const MatchResult final_match = match_keyframes(result.modified, target, cfg);
  throw BudgetExhaustedError("loop-closure injection budget exhausted at similarity " +
                                 std::to_string(final_match.similarity),
                             final_match.similarity);
}

FramePose relocalize(const FramePose&, const Keyframe& target) { return target.pose; }

LoopClosureFixture load_loop_closure_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture file: " + path);

  std::vector<Keyframe> frames;
  int current_id = std::numeric_limits<int>::min();
  int target_id = std::numeric_limits<int>::min();
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream is(line);
    std::string tag;
    if (!(is >> tag) || tag[0] == '#') continue;
    if (tag == "current") {
      is >> current_id;
    } else if (tag == "target") {
      is >> target_id;
    } else if (tag == "frame") {
      Keyframe frame;
      std::string pose_tag;
      is >> frame.id >> pose_tag >> frame.pose.x >> frame.pose.y >> frame.pose.heading;
      if (pose_tag != "pose") {
        throw std::runtime_error("fixture line " + std::to_string(line_number) +
                                 ": expected 'pose'");
      }
      frames.push_back(std::move(frame));
    } else if (tag == "kp") {
      if (frames.empty()) {
        throw std::runtime_error("fixture line " + std::to_string(line_number) +
                                 ": keypoint before any frame");
      }
      Keypoint kp;
      std::string hex;
      is >> kp.x >> kp.y >> kp.angle >> kp.scale >> hex;
      if (kp.scale <= 0) {
        throw std::runtime_error("fixture line " + std::to_string(line_number) +
                                 ": scale must be positive");
      }
      kp.descriptor = Descriptor::from_hex(hex);
      frames.back().keypoints.push_back(kp);
    } else {
      throw std::runtime_error("fixture line " + std::to_string(line_number) +
                               ": unknown directive '" + tag + "'");
    }
    if (is.fail()) {
      throw std::runtime_error("fixture line " + std::to_string(line_number) +
                               ": malformed fields");
    }
  }

  LoopClosureFixture fixture;
  fixture.target_id = target_id;
  bool found_current = false;
  for (Keyframe& frame : frames) {
    for (const Keyframe& other : fixture.database) {
      if (other.id == frame.id) {
        throw std::runtime_error("fixture has duplicate frame id " + std::to_string(frame.id));
      }
    }
    if (frame.id == current_id) {
      fixture.current = std::move(frame);
      found_current = true;
    } else {
      fixture.database.push_back(std::move(frame));
    }
  }
  if (!found_current) throw std::runtime_error("fixture names no current frame");
  return fixture;
}

}  // namespace rvspoof
