#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "inbetween/model/config.hpp"

namespace inbetween {

// Sinusoidal time-to-arrival code, frozen past t_max.
inline std::vector<double> tta_embedding(int tta, int d, double basis, int t_max) {
  if (tta < 1) throw std::invalid_argument("tta_embedding: tta must be at least 1");
  if (d < 2 || d % 2) throw std::invalid_argument("tta_embedding: dimension must be even");
  const double t = static_cast<double>(std::min(tta, t_max));
  std::vector<double> z(static_cast<std::size_t>(d));
  for (int i = 0; i < d / 2; ++i) {
    const double freq = std::pow(basis, 2.0 * i / d);
    z[2 * i] = std::sin(t / freq);
    z[2 * i + 1] = std::cos(t / freq);
  }
  return z;
}

// Target-noise scale: full until 30 frames out, fading to zero 5 frames before arrival.
inline double noise_schedule(int tta) {
  if (tta >= 30) return 1.0;
  if (tta >= 5) return (tta - 5) / 25.0;
  return 0.0;
}

inline int curriculum_max(long epoch, const CurriculumConfig& c) {
  if (epoch < 0) throw std::invalid_argument("curriculum: negative epoch");
  if (c.n_ep_max <= 0 || epoch >= c.n_ep_max) return c.p_max;
  const double v = c.p_min + static_cast<double>(c.p_max - c.p_min) * static_cast<double>(epoch) / c.n_ep_max;
  return std::clamp(static_cast<int>(std::lround(v)), c.p_min, c.p_max);
}

inline int sample_length(std::mt19937_64& rng, int p_min, int current_max) {
  return std::uniform_int_distribution<int>(p_min, std::max(p_min, current_max))(rng);
}

}  // namespace inbetween
