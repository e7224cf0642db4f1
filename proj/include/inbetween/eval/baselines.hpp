#pragma once

#include <stdexcept>
#include <vector>

#include "inbetween/core/skeleton.hpp"

namespace inbetween {

// Linear root, slerped joints, t = k / (L + 1).
inline std::vector<FrameState> interpolate_baseline(const FrameState& last_seed, const FrameState& target, int length) {
  if (length < 1) throw std::invalid_argument("transition length must be at least 1");
  if (last_seed.q.size() != target.q.size()) throw std::invalid_argument("interpolate_baseline: joint counts differ");
  std::vector<FrameState> out(static_cast<std::size_t>(length));
  for (int k = 1; k <= length; ++k) {
    const double t = static_cast<double>(k) / (length + 1);
    FrameState& f = out[k - 1];
    f.r = last_seed.r * (1.0 - t) + target.r * t;
    f.q.resize(last_seed.q.size());
    for (std::size_t j = 0; j < f.q.size(); ++j) f.q[j] = slerp(last_seed.q[j], target.q[j], t);
    for (int c = 0; c < kContactCount; ++c) f.c[c] = t < 0.5 ? last_seed.c[c] : target.c[c];
  }
  return out;
}

inline std::vector<FrameState> zero_velocity_baseline(const FrameState& last_seed, int length) {
  if (length < 1) throw std::invalid_argument("transition length must be at least 1");
  return std::vector<FrameState>(static_cast<std::size_t>(length), last_seed);
}

}  // namespace inbetween
