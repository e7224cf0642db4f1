#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "inbetween/core/kinematics.hpp"
#include "inbetween/data/features.hpp"

namespace inbetween {

using Sequence = std::vector<std::vector<double>>;  // [time][feature]

struct MetricOptions {
  bool hemisphere_align = true;
  // NPSS spectrum convention. Defaults: |X_k|^2, bins 1..N/2.
  bool npss_magnitude = true;    // false: squared real part only
  bool npss_exclude_dc = true;
  bool npss_one_sided = true;

  std::string fingerprint() const {
    return std::string("l2q_align=") + (hemisphere_align ? "1" : "0") + ";npss=" +
           (npss_magnitude ? "mag" : "real") + (npss_exclude_dc ? ",nodc" : ",dc") +
           (npss_one_sided ? ",onesided" : ",twosided") + ";l2p_center=gt_root_xz";
  }
};

// Stacked global quaternions (4j per frame).
inline Sequence global_quaternions(const Skeleton& s, const std::vector<FrameState>& frames) {
  Sequence out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    const auto g = fk(s, f).g;
    std::vector<double> row;
    row.reserve(g.size() * 4);
    for (const auto& q : g) row.insert(row.end(), {q.w, q.x, q.y, q.z});
    out.push_back(std::move(row));
  }
  return out;
}

namespace detail {
inline void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                                std::to_string(b) + ")");
  }
  if (a == 0) throw std::invalid_argument(std::string(what) + ": empty sequence");
}
}  // namespace detail

// Sum over frames of the L2 distance between stacked global quaternions.
inline double l2q_sum(const Sequence& pred, const Sequence& truth, bool hemisphere_align = true) {
  detail::check_lengths(pred.size(), truth.size(), "l2q");
  double total = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const auto& p = pred[t];
    const auto& g = truth[t];
    if (p.size() != g.size() || p.size() % 4) throw std::invalid_argument("l2q: feature size mismatch");
    double sq = 0;
    for (std::size_t k = 0; k < p.size(); k += 4) {
      double sign = 1;
      if (hemisphere_align) {
        const double d = p[k] * g[k] + p[k + 1] * g[k + 1] + p[k + 2] * g[k + 2] + p[k + 3] * g[k + 3];
        if (d < 0) sign = -1;
      }
      for (int c = 0; c < 4; ++c) {
        const double e = sign * p[k + c] - g[k + c];
        sq += e * e;
      }
    }
    total += std::sqrt(sq);
  }
  return total;
}

inline double l2q(const Skeleton& s, const std::vector<FrameState>& pred, const std::vector<FrameState>& truth,
                  bool hemisphere_align = true) {
  detail::check_lengths(pred.size(), truth.size(), "l2q");
  return l2q_sum(global_quaternions(s, pred), global_quaternions(s, truth), hemisphere_align) /
         static_cast<double>(pred.size());
}

// Sum over frames of the L2 distance between normalized, horizontally centered global positions.
// Both sequences share the same center (ground truth root XZ mean unless given).
inline double l2p_sum(const Skeleton& s, const std::vector<FrameState>& pred, const std::vector<FrameState>& truth,
                      const NormStats& stats, const Vec3* center = nullptr) {
  detail::check_lengths(pred.size(), truth.size(), "l2p");
  const std::size_t dims = static_cast<std::size_t>(s.joint_count()) * 3;
  if (stats.mean.size() != dims || stats.std.size() != dims) throw std::invalid_argument("l2p: missing or mismatched stats");
  const Vec3 c = center ? *center : mean_root_xz(truth);
  const auto P = centered_positions(s, pred, &c);
  const auto G = centered_positions(s, truth, &c);
  double total = 0;
  for (std::size_t t = 0; t < P.size(); ++t) {
    double sq = 0;
    for (std::size_t d = 0; d < dims; ++d) {
      const double a = (P[t][d] - stats.mean[d]) / stats.std[d];
      const double b = (G[t][d] - stats.mean[d]) / stats.std[d];
      sq += (a - b) * (a - b);
    }
    total += std::sqrt(sq);
  }
  return total;
}

inline double l2p(const Skeleton& s, const std::vector<FrameState>& pred, const std::vector<FrameState>& truth,
                  const NormStats& stats, const Vec3* center = nullptr) {
  return l2p_sum(s, pred, truth, stats, center) / static_cast<double>(pred.size());
}

// Normalized power spectrum of one feature column; returns the total power through `power`.
inline std::vector<double> power_distribution(const std::vector<double>& x, const MetricOptions& o, double& power) {
  const std::size_t n = x.size();
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> X;
  fft.fwd(X, x);
  const std::size_t first = o.npss_exclude_dc ? 1 : 0;
  const std::size_t last = o.npss_one_sided ? n / 2 : n - 1;
  std::vector<double> p;
  power = 0;
  for (std::size_t k = first; k <= last && k < n; ++k) {
    const double v = o.npss_magnitude ? std::norm(X[k]) : X[k].real() * X[k].real();
    p.push_back(v);
    power += v;
  }
  if (p.empty()) return p;
  // Round-off floor relative to the full spectrum energy.
  double energy = 0;
  for (const auto& c : X) energy += std::norm(c);
  if (power <= 1e-24 * energy || power == 0) {
    // A flat signal has no spectrum to compare; treat it as uniform.
    power = 0;
    for (auto& v : p) v = 1.0 / static_cast<double>(p.size());
    return p;
  }
  for (auto& v : p) v /= power;
  return p;
}

inline double emd_1d(const std::vector<double>& a, const std::vector<double>& b) {
  double ca = 0, cb = 0, d = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ca += a[k];
    cb += b[k];
    d += std::abs(ca - cb);
  }
  return d;
}

// Power-weighted EMD accumulators so windows can be reduced in any grouping.
struct NpssAccumulator {
  double weighted_emd = 0;
  double weight = 0;
  double pred_power = 0;

  void add(const NpssAccumulator& o) {
    weighted_emd += o.weighted_emd;
    weight += o.weight;
    pred_power += o.pred_power;
  }
  double value() const {
    if (!(weight > 0)) throw std::domain_error("npss: ground truth has zero power in every dimension");
    return weighted_emd / weight;
  }
  // Flat truth and flat prediction count as identical spectra.
  double value_or_flat() const { return weight == 0 && pred_power == 0 ? 0.0 : value(); }
};

inline NpssAccumulator npss_accumulate(const Sequence& pred, const Sequence& truth, const MetricOptions& o = {}) {
  detail::check_lengths(pred.size(), truth.size(), "npss");
  if (pred.size() < 2) throw std::invalid_argument("npss: sequences need at least two frames");
  const std::size_t T = pred.size(), D = truth[0].size();
  NpssAccumulator acc;
  std::vector<double> cp(T), ct(T);
  for (std::size_t d = 0; d < D; ++d) {
    for (std::size_t t = 0; t < T; ++t) {
      if (pred[t].size() != D || truth[t].size() != D) throw std::invalid_argument("npss: feature size mismatch");
      cp[t] = pred[t][d];
      ct[t] = truth[t][d];
    }
    double pp = 0, pt = 0;
    const auto dp = power_distribution(cp, o, pp);
    const auto dt = power_distribution(ct, o, pt);
    acc.weighted_emd += pt * emd_1d(dp, dt);
    acc.weight += pt;
    acc.pred_power += pp;
  }
  return acc;
}

inline double npss(const Sequence& pred, const Sequence& truth, const MetricOptions& o = {}) {
  return npss_accumulate(pred, truth, o).value();
}

// Multi-window NPSS with weights pooled across windows.
inline double npss(const std::vector<Sequence>& pred, const std::vector<Sequence>& truth, const MetricOptions& o = {}) {
  detail::check_lengths(pred.size(), truth.size(), "npss");
  NpssAccumulator acc;
  for (std::size_t w = 0; w < pred.size(); ++w) acc.add(npss_accumulate(pred[w], truth[w], o));
  return acc.value();
}

}  // namespace inbetween
