#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "inbetween/core/quaternion.hpp"

namespace inbetween {

// Contact slots follow this order everywhere: left foot, left toe, right foot, right toe.
inline constexpr int kContactCount = 4;
using Contacts = std::array<double, kContactCount>;

struct Skeleton {
  std::vector<std::string> names;
  std::vector<int> parents;  // parents[0] == -1
  std::vector<Vec3> offsets;
  std::vector<int> mirror_map;
  std::array<int, kContactCount> foot_joints{};
  // Euler channel order per joint for BVH I/O, e.g. "ZYX" (first letter applied outermost).
  std::vector<std::string> rotation_orders;

  int joint_count() const { return static_cast<int>(parents.size()); }

  // Throws std::invalid_argument describing the first broken invariant.
  void validate() const {
    const auto j = parents.size();
    if (j == 0) throw std::invalid_argument("skeleton has no joints");
    if (offsets.size() != j || names.size() != j || mirror_map.size() != j) {
      throw std::invalid_argument("skeleton field sizes disagree with joint count");
    }
    if (parents[0] != -1) throw std::invalid_argument("joint 0 must be the root");
    for (std::size_t k = 1; k < j; ++k) {
      if (parents[k] < 0 || parents[k] >= static_cast<int>(k)) {
        throw std::invalid_argument("joint " + std::to_string(k) + " is not topologically sorted");
      }
    }
    for (std::size_t k = 0; k < j; ++k) {
      const int m = mirror_map[k];
      if (m < 0 || m >= static_cast<int>(j) || mirror_map[m] != static_cast<int>(k)) {
        throw std::invalid_argument("mirror map is not an involution at joint " + std::to_string(k));
      }
    }
    for (int f : foot_joints) {
      if (f < 0 || f >= static_cast<int>(j)) throw std::invalid_argument("foot joint index out of range");
    }
  }
};

namespace detail {
inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}
}  // namespace detail

// Pairs joints whose names differ only by Left/Right (any case); unmatched joints map to themselves.
inline std::vector<int> infer_mirror_map(const std::vector<std::string>& names) {
  std::vector<int> map(names.size());
  for (std::size_t k = 0; k < names.size(); ++k) {
    map[k] = static_cast<int>(k);
    const std::string n = detail::lower(names[k]);
    std::string swapped;
    if (auto p = n.find("left"); p != std::string::npos) {
      swapped = n.substr(0, p) + "right" + n.substr(p + 4);
    } else if (auto p2 = n.find("right"); p2 != std::string::npos) {
      swapped = n.substr(0, p2) + "left" + n.substr(p2 + 5);
    } else {
      continue;
    }
    for (std::size_t o = 0; o < names.size(); ++o) {
      if (detail::lower(names[o]) == swapped) {
        map[k] = static_cast<int>(o);
        break;
      }
    }
  }
  return map;
}

// Finds LeftFoot/LeftToe/RightFoot/RightToe by name; falls back to the last joint.
inline std::array<int, kContactCount> infer_foot_joints(const std::vector<std::string>& names) {
  const std::array<std::pair<const char*, const char*>, kContactCount> keys{{
      {"left", "foot"}, {"left", "toe"}, {"right", "foot"}, {"right", "toe"}}};
  std::array<int, kContactCount> out{};
  const int fallback = static_cast<int>(names.size()) - 1;
  for (int s = 0; s < kContactCount; ++s) {
    out[s] = fallback;
    for (std::size_t k = 0; k < names.size(); ++k) {
      const std::string n = detail::lower(names[k]);
      if (n.find(keys[s].first) != std::string::npos && n.find(keys[s].second) != std::string::npos) {
        out[s] = static_cast<int>(k);
        break;
      }
    }
  }
  return out;
}

struct FrameState {
  std::vector<Quaternion> q;  // joint-local; q[0] is the global root orientation
  Vec3 r;
  Contacts c{};
};

struct MotionClip {
  std::shared_ptr<const Skeleton> skeleton;
  std::vector<FrameState> frames;
  double fps = 30.0;
  std::string subject;
  std::string action;

  std::size_t size() const { return frames.size(); }
};

inline FrameState rest_frame(const Skeleton& s, Vec3 root = {}) {
  FrameState f;
  f.q.assign(static_cast<std::size_t>(s.joint_count()), Quaternion::identity());
  f.r = root;
  return f;
}

}  // namespace inbetween
