#pragma once

#include <chrono>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "inbetween/core/ik.hpp"
#include "inbetween/eval/baselines.hpp"
#include "inbetween/model/model.hpp"

namespace inbetween {

// Well-formed input that cannot be served (wrong frame count, L < 1).
class UnprocessableRequest : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TransitionRequest {
  std::vector<FrameState> past;
  FrameState target;
  int length = 0;
  double variation = 0;
  std::uint64_t seed = 0;
  bool apply_ik = false;
};

struct TransitionResponse {
  std::vector<FrameState> frames;  // contact probabilities in FrameState::c
  Quaternion applied_yaw;
  double timing_ms = 0;
  std::vector<std::string> warnings;
};

inline constexpr double kContactProbability = 0.5;

inline void check_request(const TransitionRequest& r, int joints, int past) {
  if (r.length < 1) throw UnprocessableRequest("length must be at least 1, got " + std::to_string(r.length));
  if (static_cast<int>(r.past.size()) != past)
    throw UnprocessableRequest("expected " + std::to_string(past) + " past frames, got " + std::to_string(r.past.size()));
  auto check = [&](const FrameState& f, const std::string& where) {
    if (static_cast<int>(f.q.size()) != joints)
      throw UnprocessableRequest(where + " has " + std::to_string(f.q.size()) + " joints, skeleton has " +
                                 std::to_string(joints));
  };
  for (std::size_t i = 0; i < r.past.size(); ++i) check(r.past[i], "past[" + std::to_string(i) + "]");
  check(r.target, "target");
  if (!(r.variation >= 0)) throw UnprocessableRequest("variation must be nonnegative");
}

// Foot-plant cleanup: while a foot slot's contact probability exceeds 0.5 its foot joint is pinned
// to where it stood at the first frame of that contact. Toe slots are left alone.
inline std::vector<std::string> apply_contact_ik(const Skeleton& s, std::vector<FrameState>& frames) {
  std::vector<std::string> warnings;
  for (int slot : {0, 2}) {
    const int foot = s.foot_joints[slot];
    if (foot <= 0 || s.parents[foot] <= 0) continue;
    bool planted = false;
    Vec3 anchor;
    for (std::size_t t = 0; t < frames.size(); ++t) {
      if (frames[t].c[slot] <= kContactProbability) {
        planted = false;
        continue;
      }
      if (!planted) {
        anchor = fk(s, frames[t]).p[foot];
        planted = true;
        continue;
      }
      auto res = two_bone_ik(s, frames[t], foot, anchor);
      if (res.clamped)
        warnings.push_back("IK target unreachable for joint " + s.names[foot] + " at frame " + std::to_string(t) +
                           "; clamped");
      res.frame.c = frames[t].c;
      frames[t] = std::move(res.frame);
    }
  }
  return warnings;
}

// Canonicalizes around the last past frame, rolls out, and maps the frames back to the caller's space.
template <class T>
TransitionResponse run_transition(Model<T>& m, const TransitionRequest& req) {
  const auto start = std::chrono::steady_clock::now();
  const auto& gc = m.cfg.generator;
  check_request(req, gc.joints, gc.past);
  TransitionResponse res;
  if (req.length > gc.max_transition)
    res.warnings.push_back("length " + std::to_string(req.length) + " exceeds the trained maximum of " +
                           std::to_string(gc.max_transition));
  MotionClip clip;
  clip.skeleton = m.skeleton;
  clip.frames = req.past;
  clip.frames.push_back(req.target);
  for (auto& f : clip.frames)
    for (auto& q : f.q) q = quat_normalize(q);
  make_continuous(clip.frames);
  const auto canon = canonicalize(clip, static_cast<std::size_t>(gc.past - 1));
  if (canon.degenerate) res.warnings.push_back("root forward axis is vertical at the last past frame; no yaw applied");
  std::vector<FrameState> seed(canon.clip.frames.begin(), canon.clip.frames.end() - 1);
  const auto gen = generate_transition(m.generator, seed, canon.clip.frames.back(), req.length, req.variation, req.seed);
  const Quaternion back = canon.applied_yaw.conjugate();
  res.applied_yaw = canon.applied_yaw;
  for (std::size_t t = 0; t < gen.frames.size(); ++t) {
    FrameState f = apply_yaw(gen.frames[t], back);
    f.c = gen.contacts[t];
    res.frames.push_back(std::move(f));
  }
  if (req.apply_ik) {
    for (auto& w : apply_contact_ik(*m.skeleton, res.frames)) res.warnings.push_back(std::move(w));
  }
  res.timing_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return res;
}

inline TransitionResponse run_interpolation(const Skeleton& s, int past, const TransitionRequest& req) {
  check_request(req, s.joint_count(), past);
  TransitionResponse res;
  res.frames = interpolate_baseline(req.past.back(), req.target, req.length);
  return res;
}

}  // namespace inbetween
