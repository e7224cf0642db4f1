#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "inbetween/core/kinematics.hpp"
#include "inbetween/data/windows.hpp"

namespace inbetween {

// Statistics of horizontally centered global positions, one entry per joint coordinate (j*3).
struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;

  bool empty() const { return mean.empty(); }
};

inline constexpr double kStdFloor = 1e-8;

// FK positions of every frame, flattened to j*3, with the sequence's mean root XZ removed.
inline std::vector<std::vector<double>> centered_positions(const Skeleton& s, const std::vector<FrameState>& frames,
                                                           const Vec3* center = nullptr) {
  std::vector<std::vector<Vec3>> pos;
  pos.reserve(frames.size());
  double cx = 0, cz = 0;
  for (const auto& f : frames) {
    pos.push_back(fk(s, f).p);
    cx += pos.back()[0].x;
    cz += pos.back()[0].z;
  }
  if (center) {
    cx = center->x;
    cz = center->z;
  } else if (!frames.empty()) {
    cx /= static_cast<double>(frames.size());
    cz /= static_cast<double>(frames.size());
  }
  std::vector<std::vector<double>> out(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    out[t].reserve(pos[t].size() * 3);
    for (const auto& p : pos[t]) {
      out[t].push_back(p.x - cx);
      out[t].push_back(p.y);
      out[t].push_back(p.z - cz);
    }
  }
  return out;
}

inline Vec3 mean_root_xz(const std::vector<FrameState>& frames) {
  Vec3 c;
  for (const auto& f : frames) {
    c.x += f.r.x;
    c.z += f.r.z;
  }
  if (!frames.empty()) c = c / static_cast<double>(frames.size());
  return c;
}

inline NormStats compute_norm_stats(const std::vector<MotionWindow>& windows) {
  if (windows.empty()) throw std::invalid_argument("compute_norm_stats: no windows");
  const Skeleton& s = *windows.front().skeleton;
  const std::size_t dims = static_cast<std::size_t>(s.joint_count()) * 3;
  // Welford accumulation per dimension.
  std::vector<double> mean(dims, 0.0), m2(dims, 0.0);
  double count = 0;
  for (const auto& w : windows) {
    for (const auto& row : centered_positions(s, w.frames)) {
      count += 1;
      for (std::size_t d = 0; d < dims; ++d) {
        const double delta = row[d] - mean[d];
        mean[d] += delta / count;
        m2[d] += delta * (row[d] - mean[d]);
      }
    }
  }
  NormStats out;
  out.mean = std::move(mean);
  out.std.resize(dims);
  for (std::size_t d = 0; d < dims; ++d) out.std[d] = std::max(kStdFloor, std::sqrt(std::max(0.0, m2[d] / count)));
  return out;
}

// Per-frame model inputs for frames 0..past+L (the last one is the target keyframe).
struct ModelInputs {
  int past = kDefaultPast;
  int length = 0;
  std::vector<std::vector<Quaternion>> q;
  std::vector<Vec3> r;
  std::vector<Vec3> root_velocity;      // r_t - r_{t-1}; forward difference at frame 0
  std::vector<Contacts> contacts;
  std::vector<Vec3> root_offset;        // r_T - r_t
  std::vector<std::vector<double>> quat_offset;  // q_T - q_t element-wise, j*4
  std::vector<Quaternion> target_q;
  std::vector<int> tta;                 // (past + L) - i
  bool mirrored = false;

  int target_index() const { return past + length; }
};

inline ModelInputs assemble_from_frames(const std::vector<FrameState>& frames, int past, int length) {
  const int target = past + length;
  if (length < 1 || target >= static_cast<int>(frames.size())) {
    throw std::out_of_range("assemble_example: transition length " + std::to_string(length) +
                            " exceeds the window");
  }
  ModelInputs m;
  m.past = past;
  m.length = length;
  const FrameState& tgt = frames[target];
  m.target_q = tgt.q;
  for (int i = 0; i <= target; ++i) {
    const FrameState& f = frames[i];
    m.q.push_back(f.q);
    m.r.push_back(f.r);
    m.contacts.push_back(f.c);
    m.root_velocity.push_back(i == 0 ? frames[1].r - frames[0].r : f.r - frames[i - 1].r);
    m.root_offset.push_back(tgt.r - f.r);
    std::vector<double> oq;
    oq.reserve(f.q.size() * 4);
    for (std::size_t k = 0; k < f.q.size(); ++k) {
      for (int c = 0; c < 4; ++c) oq.push_back(tgt.q[k][c] - f.q[k][c]);
    }
    m.quat_offset.push_back(std::move(oq));
    m.tta.push_back(target - i);
  }
  return m;
}

// With an rng (training mode) the window is mirrored with probability 0.5.
inline ModelInputs assemble_example(const MotionWindow& window, int length, std::mt19937_64* rng = nullptr) {
  if (rng) {
    std::bernoulli_distribution coin(0.5);
    if (coin(*rng)) {
      ModelInputs m = assemble_from_frames(mirror_window(window).frames, window.past, length);
      m.mirrored = true;
      return m;
    }
  }
  return assemble_from_frames(window.frames, window.past, length);
}

inline int critic_feature_dim(int joints) { return 3 + 2 * (joints - 1) * 3; }

// Root velocity, root-relative positions of non-root joints and their velocities.
inline std::vector<std::vector<double>> critic_features(const Skeleton& s, const std::vector<FrameState>& frames) {
  if (frames.size() < 2) throw std::invalid_argument("critic_features needs at least two frames");
  const int j = s.joint_count();
  std::vector<std::vector<Vec3>> pos;
  for (const auto& f : frames) pos.push_back(fk(s, f).p);
  auto rel = [&](std::size_t t, int k) { return pos[t][k] - pos[t][0]; };
  std::vector<std::vector<double>> out(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const std::size_t a = t == 0 ? 1 : t, b = t == 0 ? 0 : t - 1;
    auto& row = out[t];
    row.reserve(static_cast<std::size_t>(critic_feature_dim(j)));
    const Vec3 rv = pos[a][0] - pos[b][0];
    row.insert(row.end(), {rv.x, rv.y, rv.z});
    for (int k = 1; k < j; ++k) {
      const Vec3 x = rel(t, k);
      row.insert(row.end(), {x.x, x.y, x.z});
    }
    for (int k = 1; k < j; ++k) {
      const Vec3 v = rel(a, k) - rel(b, k);
      row.insert(row.end(), {v.x, v.y, v.z});
    }
  }
  return out;
}

}  // namespace inbetween
