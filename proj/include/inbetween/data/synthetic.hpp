#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "inbetween/core/kinematics.hpp"

namespace inbetween {

// Root turns at a constant yaw rate while moving along its heading (a circular path); every
// joint composes two constant-rate rotations about different fixed axes.
inline MotionClip constant_angular_velocity_clip(std::shared_ptr<const Skeleton> s, int frames, std::mt19937_64& rng,
                                                 double max_rate = 0.05) {
  std::uniform_real_distribution<double> rate(-max_rate, max_rate), unit(-1.0, 1.0);
  auto axis = [&] {
    Vec3 v{unit(rng), unit(rng), unit(rng)};
    const double n = norm(v);
    return n < 1e-6 ? Vec3{0, 1, 0} : v / n;
  };
  const int j = s->joint_count();
  std::vector<Vec3> a(j), b(j);
  std::vector<double> wa(j), wb(j);
  for (int k = 0; k < j; ++k) {
    a[k] = axis();
    b[k] = axis();
    wa[k] = rate(rng);
    wb[k] = rate(rng);
  }
  const double yaw_rate = rate(rng) + (max_rate * 0.5);
  const double speed = 0.02 + 0.03 * std::abs(unit(rng));
  const double heading0 = 3.14159265358979323846 * unit(rng);
  MotionClip c;
  c.skeleton = s;
  c.subject = "subject5";
  c.action = "synthetic";
  Vec3 root{0, 1, 0};
  for (int t = 0; t < frames; ++t) {
    FrameState f = rest_frame(*s);
    const double h = heading0 + yaw_rate * t;
    for (int k = 0; k < j; ++k)
      f.q[k] = quat_mul(quat_from_axis_angle(a[k], wa[k] * t), quat_from_axis_angle(b[k], wb[k] * t));
    f.q[0] = quat_mul(quat_from_axis_angle(Vec3{0, 1, 0}, h), f.q[0]);
    f.r = root;
    root += Vec3{std::sin(h), 0, std::cos(h)} * speed;
    c.frames.push_back(std::move(f));
  }
  return c;
}

}  // namespace inbetween

namespace inbetween {

// Root, hip, knee, ankle stacked along -Y; one meter tall.
inline std::shared_ptr<Skeleton> toy_chain_skeleton() {
  auto s = std::make_shared<Skeleton>();
  s->names = {"Hips", "UpLeg", "Leg", "Foot"};
  s->parents = {-1, 0, 1, 2};
  s->offsets = {{0, 0, 0}, {0, -0.1, 0}, {0, -0.45, 0}, {0, -0.45, 0}};
  s->mirror_map = {0, 1, 2, 3};
  s->foot_joints = {3, 3, 3, 3};
  s->rotation_orders.assign(4, "ZYX");
  return s;
}

inline constexpr double kToyContactThreshold = 0.02;  // meters per frame

struct GaitParams {
  double phase = 0;      // radians
  double speed = 1.2;    // meters per second
  double heading = 0;    // radians about +Y
  double turn = 0;       // radians per frame
};

inline MotionClip gait_clip(std::shared_ptr<const Skeleton> s, const GaitParams& p, int frames, double fps = 30.0) {
  const double two_pi = 6.28318530717958647692;
  const double cadence = 0.7 + 0.4 * p.speed;  // strides per second
  // Hip amplitude that makes the foot stand still at mid stance.
  const double swing = p.speed / (0.9 * two_pi * cadence);
  MotionClip c;
  c.skeleton = s;
  c.fps = fps;
  Vec3 root{0, 1.0, 0};
  for (int t = 0; t < frames; ++t) {
    const double ph = p.phase + two_pi * cadence * t / fps;
    const double h = p.heading + p.turn * t;
    FrameState f = rest_frame(*s);
    f.q[0] = quat_mul(quat_from_axis_angle(Vec3{0, 1, 0}, h),
                      quat_from_axis_angle(Vec3{0, 0, 1}, 0.05 * std::sin(ph)));
    f.q[1] = quat_from_axis_angle(Vec3{1, 0, 0}, -swing * std::sin(ph));
    f.q[2] = quat_from_axis_angle(Vec3{1, 0, 0}, 0.5 * std::max(0.0, std::cos(ph)));
    f.q[3] = quat_from_axis_angle(Vec3{1, 0, 0}, -0.2 * std::cos(ph));
    f.r = root;
    f.r.y = 1.0 - 0.02 * std::cos(2 * ph);
    root += Vec3{std::sin(h), 0, std::cos(h)} * (p.speed / fps);
    c.frames.push_back(std::move(f));
  }
  return c;
}

// Clips cycle through subject1..subject5 so both window protocols apply unchanged.
inline std::vector<MotionClip> toy_gait_corpus(std::shared_ptr<const Skeleton> s, int clips, int frames,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<MotionClip> out;
  for (int i = 0; i < clips; ++i) {
    GaitParams p;
    p.phase = 6.28318530717958647692 * u(rng);
    p.speed = 0.6 + 1.4 * u(rng);
    p.heading = 6.28318530717958647692 * u(rng);
    p.turn = 0.03 * (2 * u(rng) - 1);
    MotionClip c = gait_clip(s, p, frames);
    c.subject = "subject" + std::to_string(i % 5 + 1);
    c.action = "gait" + std::to_string(i);
    make_continuous(c.frames);
    assign_contacts(c, kToyContactThreshold);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace inbetween
