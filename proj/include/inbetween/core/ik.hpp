#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "inbetween/core/kinematics.hpp"

namespace inbetween {

struct IkResult {
  FrameState frame;
  bool clamped = false;  // target was outside the chain's reach
};

namespace detail {

inline double angle_between(const Vec3& a, const Vec3& b) {
  const double na = norm(a), nb = norm(b);
  const double c = dot(a, b) / (na * nb);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

inline Vec3 any_perpendicular(const Vec3& v) {
  const Vec3 trial = std::abs(v.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  return cross(v, trial);
}

// Rotates joint k about a global axis through its own position.
inline void rotate_joint_globally(FrameState& f, const FkResult& pose, int k, const Vec3& axis,
                                  double angle) {
  if (angle == 0.0) return;
  const Vec3 local_axis = quat_rotate(pose.g[k].conjugate(), axis);
  f.q[k] = quat_normalize(quat_mul(f.q[k], quat_from_axis_angle(local_axis, angle)));
}

}  // namespace detail

// Analytic hip-knee-foot solve; the knee stays in its current bend plane.
inline IkResult two_bone_ik(const Skeleton& skeleton, const FrameState& frame, int foot_joint,
                            const Vec3& target) {
  if (foot_joint <= 0 || foot_joint >= skeleton.joint_count()) {
    throw std::invalid_argument("two_bone_ik: invalid foot joint");
  }
  const int knee = skeleton.parents[foot_joint];
  if (knee <= 0) throw std::invalid_argument("two_bone_ik: foot has no two-bone chain");
  const int hip = skeleton.parents[knee];

  IkResult out{frame, false};
  const FkResult pose = fk(skeleton, frame);
  const Vec3 a = pose.p[hip], b = pose.p[knee], c = pose.p[foot_joint];
  const double l_ab = norm(b - a), l_cb = norm(c - b);
  if (l_ab < 1e-12 || l_cb < 1e-12) throw std::invalid_argument("two_bone_ik: zero-length bone");

  const double reach = norm(target - a);
  const double max_reach = l_ab + l_cb, min_reach = std::abs(l_ab - l_cb);
  const double lat = std::clamp(reach, min_reach, max_reach);
  out.clamped = reach > max_reach + 1e-9 || reach < min_reach - 1e-9;

  const double ac_ab_0 = detail::angle_between(c - a, b - a);
  const double ba_bc_0 = detail::angle_between(a - b, c - b);
  const double ac_ab_1 = std::acos(std::clamp(
      (l_cb * l_cb - l_ab * l_ab - lat * lat) / (-2.0 * l_ab * lat), -1.0, 1.0));
  const double ba_bc_1 = std::acos(std::clamp(
      (lat * lat - l_ab * l_ab - l_cb * l_cb) / (-2.0 * l_ab * l_cb), -1.0, 1.0));

  Vec3 bend = cross(c - a, b - a);
  if (norm(bend) < 1e-12) bend = cross(c - a, quat_rotate(pose.g[knee], Vec3{1, 0, 0}));
  if (norm(bend) < 1e-12) bend = detail::any_perpendicular(c - a);
  bend = bend / norm(bend);

  detail::rotate_joint_globally(out.frame, pose, hip, bend, ac_ab_1 - ac_ab_0);
  detail::rotate_joint_globally(out.frame, pose, knee, bend, ba_bc_1 - ba_bc_0);

  // Swing the whole chain so the foot direction points at the target.
  const FkResult bent = fk(skeleton, out.frame);
  const Vec3 ac = bent.p[foot_joint] - bent.p[hip];
  const Vec3 at = target - bent.p[hip];
  if (norm(at) > 1e-12 && norm(ac) > 1e-12) {
    Vec3 swing = cross(ac, at);
    const double angle = detail::angle_between(ac, at);
    if (norm(swing) < 1e-12) {
      if (angle < 1.0) return out;
      swing = detail::any_perpendicular(ac);
    }
    detail::rotate_joint_globally(out.frame, bent, hip, swing / norm(swing), angle);
  }
  return out;
}

}  // namespace inbetween
