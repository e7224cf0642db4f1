#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "inbetween/core/ik.hpp"
#include "inbetween/core/kinematics.hpp"
#include "test_util.hpp"

using namespace inbetween;
using inbetween::test::biped;
using inbetween::test::random_frame;
using inbetween::test::random_quat;

namespace {

constexpr double kPi = std::numbers::pi;

void expect_quat_near(const Quaternion& a, const Quaternion& b, double tol) {
  EXPECT_NEAR(a.w, b.w, tol);
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

void expect_vec_near(const Vec3& a, const Vec3& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

// Matrix-composition FK oracle: M_k = M_parent * Translate(b_k) * Rotate(q_k).
std::vector<Vec3> matrix_fk(const Skeleton& s, const std::vector<std::pair<Vec3, double>>& axis_angles,
                            const Vec3& root) {
  const int j = s.joint_count();
  std::vector<test::Mat4> M(j);
  M[0] = test::homogeneous(test::rodrigues(axis_angles[0].first, axis_angles[0].second), root);
  std::vector<Vec3> p(j);
  p[0] = root;
  for (int k = 1; k < j; ++k) {
    const auto local = test::homogeneous(test::rodrigues(axis_angles[k].first, axis_angles[k].second), s.offsets[k]);
    M[k] = test::matmul(M[s.parents[k]], local);
    p[k] = {M[k][0][3], M[k][1][3], M[k][2][3]};
  }
  return p;
}

}  // namespace

TEST(Quaternion, NormalizeExamples) {
  expect_quat_near(quat_normalize(Quaternion{1, 0, 0, 0}), {1, 0, 0, 0}, 1e-15);
  expect_quat_near(quat_normalize(Quaternion{2, 0, 0, 0}), {1, 0, 0, 0}, 1e-15);
  expect_quat_near(quat_normalize(Quaternion{1, 1, 1, 1}), {0.5, 0.5, 0.5, 0.5}, 1e-15);
  EXPECT_THROW(quat_normalize(Quaternion{0, 0, 0, 0}), DegenerateQuaternion);
}

TEST(Quaternion, NormalizedIsUnitNorm) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int i = 0; i < 200; ++i) {
    const Quaternion q = quat_normalize(Quaternion{n(rng), n(rng), n(rng), n(rng)});
    EXPECT_LT(std::abs(norm(q) - 1.0), 1e-9);
  }
}

TEST(Quaternion, MulAndRotate) {
  std::mt19937_64 rng(2);
  const Quaternion b = random_quat(rng);
  expect_quat_near(quat_mul(Quaternion::identity(), b), b, 1e-15);
  expect_quat_near(quat_mul(b, b.conjugate()), Quaternion::identity(), 1e-15);

  const Quaternion yaw90 = quat_from_axis_angle(Vec3{0, 1, 0}, kPi / 2);
  expect_vec_near(quat_rotate(yaw90, Vec3{1, 0, 0}), Vec3{0, 0, -1}, 1e-15);

  // Rotation-matrix oracle on random inputs.
  for (int i = 0; i < 100; ++i) {
    const Vec3 axis = test::random_unit(rng);
    const double angle = std::uniform_real_distribution<double>(-3, 3)(rng);
    const Vec3 v = test::random_unit(rng) * 2.5;
    const auto R = test::rodrigues(axis, angle);
    const Vec3 expect{R[0][0] * v.x + R[0][1] * v.y + R[0][2] * v.z, R[1][0] * v.x + R[1][1] * v.y + R[1][2] * v.z,
                      R[2][0] * v.x + R[2][1] * v.y + R[2][2] * v.z};
    expect_vec_near(quat_rotate(quat_from_axis_angle(axis, angle), v), expect, 1e-12);
  }
}

TEST(Quaternion, SlerpExamples) {
  std::mt19937_64 rng(3);
  const Quaternion a = random_quat(rng), b = random_quat(rng);
  expect_quat_near(slerp(a, b, 0.0), a, 1e-12);
  const Quaternion end = slerp(a, b, 1.0);
  EXPECT_NEAR(std::abs(dot(end, b)), 1.0, 1e-12);

  const Quaternion y90 = quat_from_axis_angle(Vec3{0, 1, 0}, kPi / 2);
  expect_quat_near(slerp(Quaternion::identity(), y90, 0.5), quat_from_axis_angle(Vec3{0, 1, 0}, kPi / 4), 1e-12);
  // Near-parallel endpoints fall back to lerp and stay unit.
  const Quaternion tiny = quat_from_axis_angle(Vec3{1, 0, 0}, 1e-12);
  EXPECT_NEAR(norm(slerp(Quaternion::identity(), tiny, 0.3)), 1.0, 1e-12);
}

TEST(Quaternion, SlerpTakesShortestArc) {
  const Quaternion y90 = quat_from_axis_angle(Vec3{0, 1, 0}, kPi / 2);
  const Quaternion mid = slerp(Quaternion::identity(), -y90, 0.5);
  EXPECT_NEAR(quat_angle_between(mid, Quaternion::identity()), kPi / 4, 1e-12);
}

TEST(Quaternion, SlerpArcLengthUniformity) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const Quaternion a = random_quat(rng), b = random_quat(rng);
    const double t = std::uniform_real_distribution<double>(0, 1)(rng);
    const double total = quat_angle_between(a, b);
    EXPECT_NEAR(quat_angle_between(slerp(a, b, t), a), t * total, 1e-7);
  }
}

TEST(ForwardKinematics, IdentityPoseSumsOffsets) {
  auto s = biped();
  const auto res = fk(*s, rest_frame(*s));
  for (int k = 0; k < s->joint_count(); ++k) {
    Vec3 expect;
    for (int a = k; a > 0; a = s->parents[a]) expect += s->offsets[a];
    expect_vec_near(res.p[k], expect, 1e-15);
  }
}

TEST(ForwardKinematics, YawedTwoJointChain) {
  Skeleton s;
  s.names = {"root", "tip"};
  s.parents = {-1, 0};
  s.offsets = {{0, 0, 0}, {1, 0, 0}};
  s.mirror_map = {0, 1};
  s.foot_joints = {1, 1, 1, 1};
  FrameState f = rest_frame(s);
  f.q[0] = quat_from_axis_angle(Vec3{0, 1, 0}, kPi / 2);
  const auto res = fk(s, f);
  expect_vec_near(res.p[1], Vec3{0, 0, -1}, 1e-15);
  expect_quat_near(res.g[0], f.q[0], 0);
}

TEST(ForwardKinematics, MatchesMatrixOracleOnRandomChains) {
  std::mt19937_64 rng(5);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int j = std::uniform_int_distribution<int>(2, 10)(rng);
    auto s = test::random_skeleton(j, rng);
    std::vector<std::pair<Vec3, double>> aa(j);
    FrameState f = rest_frame(*s);
    for (int k = 0; k < j; ++k) {
      aa[k] = {test::random_unit(rng), std::uniform_real_distribution<double>(-3, 3)(rng)};
      f.q[k] = quat_from_axis_angle(aa[k].first, aa[k].second);
    }
    f.r = {0.3, -1.2, 2.0};
    const auto got = fk(*s, f);
    const auto expect = matrix_fk(*s, aa, f.r);
    for (int k = 0; k < j; ++k) worst = std::max(worst, norm(got.p[k] - expect[k]));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(ForwardKinematics, RejectsJointCountMismatch) {
  auto s = biped();
  FrameState f;
  f.q.assign(3, Quaternion::identity());
  EXPECT_THROW(fk(*s, f), std::invalid_argument);
}

namespace {

MotionClip walking_clip(std::shared_ptr<const Skeleton> s, double heading, int frames = 20) {
  MotionClip clip;
  clip.skeleton = s;
  std::mt19937_64 rng(11);
  const Quaternion yaw = quat_yaw(heading);
  for (int t = 0; t < frames; ++t) {
    FrameState f = random_frame(*s, rng, 0.4);
    // Root faces local +Z rotated by `heading`; walks along that direction.
    f.q[0] = quat_mul(yaw, quat_from_axis_angle(Vec3{1, 0, 0}, 0.1 * std::sin(t * 0.3)));
    f.r = quat_rotate(yaw, Vec3{0, 1, 0.05 * t}) + Vec3{2, 0, -1};
    clip.frames.push_back(f);
  }
  return clip;
}

double horizontal_heading_error(const Quaternion& root) {
  const Vec3 fwd = quat_rotate(root, kRootForwardAxis);
  return std::abs(std::atan2(fwd.z, fwd.x));
}

}  // namespace

TEST(Canonicalize, AlreadyFacingXIsUnchanged) {
  auto s = biped();
  // Local +Z rotated +90 deg about Y points at +X.
  MotionClip clip = walking_clip(s, kPi / 2);
  const auto res = canonicalize(clip, 9);
  expect_quat_near(quat_canonical(res.applied_yaw), Quaternion::identity(), 1e-12);
  for (std::size_t t = 0; t < clip.size(); ++t) expect_vec_near(res.clip.frames[t].r, clip.frames[t].r, 1e-12);
}

TEST(Canonicalize, FacingZRotatesBackToX) {
  auto s = biped();
  const MotionClip facing_x = walking_clip(s, kPi / 2);
  // Rotate a +X-facing clip by -90 deg about Y so it faces +Z, then canonicalize.
  const Quaternion known = quat_yaw(-kPi / 2);
  MotionClip facing_z = facing_x;
  for (auto& f : facing_z.frames) f = apply_yaw(f, known);
  const auto res = canonicalize(facing_z, 9);
  EXPECT_FALSE(res.degenerate);
  expect_quat_near(quat_canonical(res.applied_yaw), quat_yaw(kPi / 2), 1e-12);
  for (std::size_t t = 0; t < facing_x.size(); ++t) {
    expect_vec_near(res.clip.frames[t].r, facing_x.frames[t].r, 1e-12);
  }
}

TEST(Canonicalize, AlignsPivotAndIsIdempotent) {
  auto s = biped();
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    const double heading = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
    const auto once = canonicalize(walking_clip(s, heading), 9);
    EXPECT_LT(horizontal_heading_error(once.clip.frames[9].q[0]), 1e-6);
    const auto twice = canonicalize(once.clip, 9);
    expect_quat_near(quat_canonical(twice.applied_yaw), Quaternion::identity(), 1e-9);
    for (std::size_t t = 0; t < once.clip.size(); ++t) {
      expect_vec_near(twice.clip.frames[t].r, once.clip.frames[t].r, 1e-9);
    }
  }
}

TEST(Canonicalize, PreservesShape) {
  auto s = biped();
  const MotionClip clip = walking_clip(s, 0.7);
  const auto res = canonicalize(clip, 5);
  for (std::size_t t = 0; t < clip.size(); ++t) {
    const auto a = fk(*s, clip.frames[t]).p;
    const auto b = fk(*s, res.clip.frames[t]).p;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(norm(a[i] - a[k]), norm(b[i] - b[k]), 1e-9);
  }
}

TEST(Canonicalize, VerticalForwardFallsBackToIdentity) {
  auto s = biped();
  MotionClip clip = walking_clip(s, 0.0, 3);
  clip.frames[1].q[0] = quat_from_axis_angle(Vec3{1, 0, 0}, -kPi / 2);  // local +Z -> +Y
  const auto res = canonicalize(clip, 1);
  EXPECT_TRUE(res.degenerate);
  expect_quat_near(res.applied_yaw, Quaternion::identity(), 0);
  EXPECT_THROW(canonicalize(clip, 3), std::out_of_range);
}

TEST(Mirror, IsAnInvolution) {
  auto s = biped();
  MotionClip clip = walking_clip(s, 0.4);
  clip.frames[0].c = {1, 0, 0, 1};
  const MotionClip twice = mirror(mirror(clip));
  for (std::size_t t = 0; t < clip.size(); ++t) {
    for (int k = 0; k < s->joint_count(); ++k) expect_quat_near(twice.frames[t].q[k], clip.frames[t].q[k], 0);
    expect_vec_near(twice.frames[t].r, clip.frames[t].r, 0);
    EXPECT_EQ(twice.frames[t].c, clip.frames[t].c);
  }
}

TEST(Mirror, SwapsContacts) {
  auto s = biped();
  MotionClip clip = walking_clip(s, 0.0, 2);
  clip.frames[0].c = {1, 0, 0, 0};
  EXPECT_EQ(mirror(clip).frames[0].c, (Contacts{0, 0, 1, 0}));
}

TEST(Mirror, SymmetricPoseNegatesX) {
  auto s = biped();
  MotionClip clip;
  clip.skeleton = s;
  clip.frames.push_back(rest_frame(*s, Vec3{0.5, 1.0, 0.2}));
  const auto a = fk(*s, clip.frames[0]).p;
  const auto b = fk(*s, mirror(clip).frames[0]).p;
  for (int k = 0; k < s->joint_count(); ++k) {
    const Vec3 expect = a[s->mirror_map[k]];
    expect_vec_near(b[k], Vec3{-expect.x, expect.y, expect.z}, 1e-12);
  }
}

TEST(Mirror, MatchesReflectionOfFkOnRandomPoses) {
  auto s = biped();
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    MotionClip clip;
    clip.skeleton = s;
    clip.frames.push_back(random_frame(*s, rng));
    const auto a = fk(*s, clip.frames[0]).p;
    const auto b = fk(*s, mirror(clip).frames[0]).p;
    for (int k = 0; k < s->joint_count(); ++k) {
      const Vec3 e = a[s->mirror_map[k]];
      expect_vec_near(b[k], Vec3{-e.x, e.y, e.z}, 1e-9);
    }
    for (int k = 0; k < s->joint_count(); ++k)
      for (int m = 0; m < s->joint_count(); ++m)
        EXPECT_NEAR(norm(a[s->mirror_map[k]] - a[s->mirror_map[m]]), norm(b[k] - b[m]), 1e-9);
  }
}

TEST(Contacts, StationaryClipIsAllContact) {
  auto s = biped();
  MotionClip clip;
  clip.skeleton = s;
  clip.frames.assign(5, rest_frame(*s, Vec3{0, 1, 0}));
  for (const auto& c : extract_contacts(clip)) EXPECT_EQ(c, (Contacts{1, 1, 1, 1}));
}

TEST(Contacts, FastFootIsNotInContact) {
  auto s = biped();
  MotionClip clip;
  clip.skeleton = s;
  for (int t = 0; t < 4; ++t) clip.frames.push_back(rest_frame(*s, Vec3{1.0 * t, 1, 0}));
  for (const auto& c : extract_contacts(clip, 0.2)) EXPECT_EQ(c, (Contacts{0, 0, 0, 0}));
  clip.frames.resize(1);
  EXPECT_THROW(extract_contacts(clip), std::invalid_argument);
}

TEST(Contacts, RecoversConstructedStancePhases) {
  // Stance, swing at 0.5 units/frame, stance. A frame is in contact when both neighbours are planted.
  auto s = biped();
  const std::vector<double> x = {0, 0, 0, 0, 0.5, 1.0, 1.5, 2.0, 2.5, 2.5, 2.5, 2.5, 2.5};
  const std::vector<double> expect = {1, 1, 1, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
  MotionClip clip;
  clip.skeleton = s;
  for (double xi : x) clip.frames.push_back(rest_frame(*s, Vec3{xi, 1, 0}));
  const auto c = extract_contacts(clip, 0.2);
  for (std::size_t t = 0; t < x.size(); ++t) {
    for (int k = 0; k < kContactCount; ++k) EXPECT_EQ(c[t][k], expect[t]) << "frame " << t;
  }
}

TEST(TwoBoneIk, CurrentTargetLeavesFrameUnchanged) {
  auto s = biped();
  std::mt19937_64 rng(9);
  const FrameState f = random_frame(*s, rng, 0.6);
  const int foot = s->foot_joints[0];
  const auto res = two_bone_ik(*s, f, foot, fk(*s, f).p[foot]);
  const auto a = fk(*s, f).p, b = fk(*s, res.frame).p;
  for (int k = 0; k < s->joint_count(); ++k) expect_vec_near(a[k], b[k], 1e-6);
}

TEST(TwoBoneIk, ReachesRandomTargets) {
  auto s = biped();
  std::mt19937_64 rng(10);
  int solved = 0;
  for (int i = 0; i < 200; ++i) {
    const FrameState f = random_frame(*s, rng, 1.0);
    const int foot = s->foot_joints[i % 2 == 0 ? 0 : 2];
    const int hip = s->parents[s->parents[foot]];
    const Vec3 hip_pos = fk(*s, f).p[hip];
    // Reachable target: a random direction at a distance strictly inside the annulus.
    const double l1 = norm(s->offsets[s->parents[foot]]), l2 = norm(s->offsets[foot]);
    const double d = std::uniform_real_distribution<double>(std::abs(l1 - l2) + 0.05, l1 + l2 - 0.05)(rng);
    const Vec3 target = hip_pos + test::random_unit(rng) * d;
    const auto res = two_bone_ik(*s, f, foot, target);
    EXPECT_FALSE(res.clamped);
    const double err = norm(fk(*s, res.frame).p[foot] - target);
    EXPECT_LT(err, 1e-6);
    solved += err < 1e-6;
    // Hip position and root untouched.
    expect_vec_near(fk(*s, res.frame).p[hip], hip_pos, 1e-12);
  }
  EXPECT_EQ(solved, 200);
}

TEST(TwoBoneIk, FullExtensionStraightensChain) {
  auto s = biped();
  const FrameState f = rest_frame(*s, Vec3{0, 1, 0});
  const int foot = s->foot_joints[0];
  const int knee = s->parents[foot], hip = s->parents[knee];
  const double reach = norm(s->offsets[knee]) + norm(s->offsets[foot]);
  const Vec3 hip_pos = fk(*s, f).p[hip];
  const Vec3 target = hip_pos + Vec3{0.3, -0.8, 0.2} / norm(Vec3{0.3, -0.8, 0.2}) * reach;
  const auto res = two_bone_ik(*s, f, foot, target);
  const auto p = fk(*s, res.frame).p;
  EXPECT_LT(norm(p[foot] - target), 1e-6);
  EXPECT_NEAR(norm(p[knee] - p[hip]) + norm(p[foot] - p[knee]), norm(p[foot] - p[hip]), 1e-9);
}

TEST(TwoBoneIk, ClampsUnreachableAndRejectsDegenerateChains) {
  auto s = biped();
  const FrameState f = rest_frame(*s, Vec3{0, 1, 0});
  const int foot = s->foot_joints[0];
  const auto res = two_bone_ik(*s, f, foot, Vec3{0, -10, 0});
  EXPECT_TRUE(res.clamped);
  EXPECT_THROW(two_bone_ik(*s, f, 1, Vec3{}), std::invalid_argument);  // hip's parent is the root
  auto flat = std::make_shared<Skeleton>(*s);
  flat->offsets[foot] = {0, 0, 0};
  EXPECT_THROW(two_bone_ik(*flat, f, foot, Vec3{}), std::invalid_argument);
}
