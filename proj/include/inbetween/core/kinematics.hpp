#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "inbetween/core/quaternion.hpp"
#include "inbetween/core/skeleton.hpp"

namespace inbetween {

struct FkResult {
  std::vector<Vec3> p;        // global positions
  std::vector<Quaternion> g;  // global orientations
};

inline FkResult fk(const Skeleton& skeleton, const FrameState& frame) {
  const int j = skeleton.joint_count();
  if (static_cast<int>(frame.q.size()) != j) {
    throw std::invalid_argument("fk: frame has " + std::to_string(frame.q.size()) +
                                " joints, skeleton has " + std::to_string(j));
  }
  FkResult out;
  out.p.resize(j);
  out.g.resize(j);
  out.g[0] = frame.q[0];
  out.p[0] = frame.r;
  for (int k = 1; k < j; ++k) {
    const int par = skeleton.parents[k];
    out.g[k] = quat_mul(out.g[par], frame.q[k]);
    out.p[k] = out.p[par] + quat_rotate(out.g[par], skeleton.offsets[k]);
  }
  return out;
}

inline double skeleton_height(const Skeleton& skeleton) {
  const auto rest = fk(skeleton, rest_frame(skeleton));
  double lo = rest.p[0].y, hi = rest.p[0].y;
  for (const auto& p : rest.p) {
    lo = std::min(lo, p.y);
    hi = std::max(hi, p.y);
  }
  return hi - lo;
}

// Local axis of the root joint treated as "forward" when canonicalizing.
inline constexpr Vec3 kRootForwardAxis{0.0, 0.0, 1.0};

struct Canonicalized {
  MotionClip clip;
  Quaternion applied_yaw;  // rotation applied to the input; its conjugate undoes it
  bool degenerate = false; // forward axis was vertical at the pivot; identity yaw used
};

// Yaw about +Y that maps the horizontal projection of `forward` onto +X.
inline Quaternion facing_yaw(const Vec3& forward, bool* degenerate = nullptr) {
  const double h = std::hypot(forward.x, forward.z);
  if (h < 1e-9) {
    if (degenerate) *degenerate = true;
    return Quaternion::identity();
  }
  if (degenerate) *degenerate = false;
  // A yaw of angle a maps +X to (cos a, 0, -sin a).
  const double heading = std::atan2(-forward.z, forward.x);
  return quat_yaw(-heading);
}

inline FrameState apply_yaw(const FrameState& f, const Quaternion& yaw) {
  FrameState out = f;
  out.q[0] = quat_normalize(quat_mul(yaw, f.q[0]));
  out.r = quat_rotate(yaw, f.r);
  return out;
}

inline Canonicalized canonicalize(const MotionClip& clip, std::size_t pivot_frame,
                                  const Vec3& forward_axis = kRootForwardAxis) {
  if (pivot_frame >= clip.frames.size()) {
    throw std::out_of_range("canonicalize: pivot frame " + std::to_string(pivot_frame) +
                            " outside clip of " + std::to_string(clip.frames.size()) + " frames");
  }
  Canonicalized out;
  const Vec3 forward = quat_rotate(clip.frames[pivot_frame].q[0], forward_axis);
  out.applied_yaw = facing_yaw(forward, &out.degenerate);
  out.clip = clip;
  for (auto& f : out.clip.frames) f = apply_yaw(f, out.applied_yaw);
  return out;
}

inline FrameState mirror_frame(const Skeleton& skeleton, const FrameState& f) {
  const int j = skeleton.joint_count();
  FrameState out;
  out.q.resize(j);
  for (int k = 0; k < j; ++k) {
    const Quaternion& s = f.q[skeleton.mirror_map[k]];
    out.q[k] = {s.w, s.x, -s.y, -s.z};
  }
  out.r = {-f.r.x, f.r.y, f.r.z};
  out.c = {f.c[2], f.c[3], f.c[0], f.c[1]};
  return out;
}

// Reflection across the YZ plane with left/right channels exchanged.
inline MotionClip mirror(const MotionClip& clip) {
  MotionClip out = clip;
  for (auto& f : out.frames) f = mirror_frame(*clip.skeleton, f);
  return out;
}

inline constexpr double kDefaultContactThreshold = 0.2;

// Per-frame contact flags from foot-joint speeds (length units per frame).
inline std::vector<Contacts> extract_contacts(const MotionClip& clip,
                                              double speed_threshold = kDefaultContactThreshold) {
  const std::size_t n = clip.frames.size();
  if (n < 2) throw std::invalid_argument("extract_contacts needs at least two frames");
  const Skeleton& s = *clip.skeleton;
  std::vector<std::array<Vec3, kContactCount>> feet(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto res = fk(s, clip.frames[t]);
    for (int c = 0; c < kContactCount; ++c) feet[t][c] = res.p[s.foot_joints[c]];
  }
  std::vector<Contacts> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t a = t == 0 ? 0 : t - 1;
    const std::size_t b = t + 1 == n ? n - 1 : t + 1;
    const double span = static_cast<double>(b - a);
    for (int c = 0; c < kContactCount; ++c) {
      const double speed = norm(feet[b][c] - feet[a][c]) / span;
      out[t][c] = speed < speed_threshold ? 1.0 : 0.0;
    }
  }
  return out;
}

inline void assign_contacts(MotionClip& clip, double speed_threshold = kDefaultContactThreshold) {
  const auto c = extract_contacts(clip, speed_threshold);
  for (std::size_t t = 0; t < clip.frames.size(); ++t) clip.frames[t].c = c[t];
}

// Flips quaternion signs so each joint stays in the hemisphere of its previous frame.
inline void make_continuous(std::vector<FrameState>& frames) {
  for (std::size_t t = 1; t < frames.size(); ++t) {
    for (std::size_t k = 0; k < frames[t].q.size(); ++k) {
      const Quaternion& a = frames[t - 1].q[k];
      Quaternion& b = frames[t].q[k];
      if (a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z < 0) b = b * -1.0;
    }
  }
}

}  // namespace inbetween
