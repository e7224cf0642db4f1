#pragma once

#include <algorithm>
#include <functional>
#include <future>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "inbetween/data/windows.hpp"
#include "inbetween/eval/baselines.hpp"
#include "inbetween/eval/metrics.hpp"

namespace inbetween {

// seed frames, target keyframe, L -> L generated frames.
using TransitionMethod =
    std::function<std::vector<FrameState>(const std::vector<FrameState>&, const FrameState&, int)>;

inline TransitionMethod interpolation_method() {
  return [](const std::vector<FrameState>& seed, const FrameState& target, int L) {
    return interpolate_baseline(seed.back(), target, L);
  };
}
inline TransitionMethod zero_velocity_method() {
  return [](const std::vector<FrameState>& seed, const FrameState&, int L) {
    return zero_velocity_baseline(seed.back(), L);
  };
}

inline const std::vector<int>& default_lengths() {
  static const std::vector<int> l{5, 15, 30, 45};
  return l;
}

struct LengthResult {
  int length = 0;
  double l2q = 0, l2p = 0, npss = 0;
  std::size_t windows = 0;
};

struct BenchmarkReport {
  std::string method;
  std::string fingerprint;
  std::size_t window_count = 0;
  std::vector<LengthResult> rows;
};

struct BenchmarkOptions {
  MetricOptions metrics;
  unsigned threads = 1;
};

namespace detail {
struct WindowScore {
  double l2q = 0, l2p = 0;
  std::size_t frames = 0;
  NpssAccumulator npss;
};

inline WindowScore score_window(const MotionWindow& w, int L, const TransitionMethod& method, const NormStats& stats,
                                const MetricOptions& mo) {
  const Skeleton& s = *w.skeleton;
  const TransitionWindow t = split_window(w, L);
  const auto pred = method(t.seed, t.target, L);
  if (static_cast<int>(pred.size()) != L) throw std::runtime_error("method returned a wrong number of frames");
  WindowScore r;
  const Vec3 center = mean_root_xz(w.frames);
  const auto gp = global_quaternions(s, pred);
  const auto gt = global_quaternions(s, t.transition);
  r.l2q = l2q_sum(gp, gt, mo.hemisphere_align);
  r.l2p = l2p_sum(s, pred, t.transition, stats, &center);
  r.frames = static_cast<std::size_t>(L);
  if (L >= 2) r.npss = npss_accumulate(gp, gt, mo);
  return r;
}
}  // namespace detail

// Per-window scores are computed (optionally in parallel) then reduced in window order,
// so the result does not depend on the thread count.
inline BenchmarkReport run_benchmark(const std::string& name, const TransitionMethod& method,
                                     const std::vector<MotionWindow>& windows, const NormStats& stats,
                                     const std::vector<int>& lengths = default_lengths(),
                                     const BenchmarkOptions& opt = {}) {
  if (windows.empty()) throw std::invalid_argument("run_benchmark: no test windows");
  for (int L : lengths) {
    if (L < 1) throw std::invalid_argument("transition length must be at least 1");
    for (const auto& w : windows) {
      if (L > w.max_transition()) {
        throw std::invalid_argument("transition length " + std::to_string(L) + " exceeds window capacity " +
                                    std::to_string(w.max_transition()));
      }
    }
  }
  BenchmarkReport rep;
  rep.method = name;
  rep.fingerprint = opt.metrics.fingerprint();
  rep.window_count = windows.size();
  const unsigned nthreads = std::max(1u, opt.threads);
  for (int L : lengths) {
    std::vector<detail::WindowScore> scores(windows.size());
    auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) scores[i] = detail::score_window(windows[i], L, method, stats, opt.metrics);
    };
    if (nthreads == 1) {
      work(0, windows.size());
    } else {
      std::vector<std::future<void>> jobs;
      const std::size_t chunk = (windows.size() + nthreads - 1) / nthreads;
      for (std::size_t b = 0; b < windows.size(); b += chunk)
        jobs.push_back(std::async(std::launch::async, work, b, std::min(windows.size(), b + chunk)));
      for (auto& j : jobs) j.get();
    }
    LengthResult row;
    row.length = L;
    row.windows = windows.size();
    double q = 0, p = 0;
    std::size_t frames = 0;
    NpssAccumulator n;
    for (const auto& s : scores) {
      q += s.l2q;
      p += s.l2p;
      frames += s.frames;
      n.add(s.npss);
    }
    row.l2q = q / static_cast<double>(frames);
    row.l2p = p / static_cast<double>(frames);
    row.npss = L >= 2 ? n.value_or_flat() : 0.0;
    rep.rows.push_back(row);
  }
  return rep;
}

inline void write_report_tsv(std::ostream& out, const std::vector<BenchmarkReport>& reports) {
  out << "method\tlength\tL2Q\tL2P\tNPSS\twindows\tfingerprint\n";
  for (const auto& r : reports) {
    for (const auto& row : r.rows) {
      out << r.method << '\t' << row.length << std::setprecision(6) << std::fixed << '\t' << row.l2q << '\t'
          << row.l2p << '\t' << row.npss << '\t' << row.windows << '\t' << r.fingerprint << '\n';
      out.unsetf(std::ios::floatfield);
    }
  }
}

// Three metric blocks side by side, one column per length.
inline void write_report_table(std::ostream& out, const std::vector<BenchmarkReport>& reports) {
  if (reports.empty()) return;
  const auto& lengths = reports.front().rows;
  const int name_w = 16;
  std::size_t nw = 0;
  for (const auto& r : reports) nw = std::max(nw, r.method.size());
  const int mw = std::max<int>(name_w, static_cast<int>(nw) + 2);
  auto block_header = [&](const char* title) {
    out << " | " << std::left << std::setw(static_cast<int>(8 * lengths.size())) << title << std::right;
  };
  out << std::left << std::setw(mw) << "" << std::right;
  block_header("L2Q");
  block_header("L2P");
  block_header("NPSS");
  out << '\n' << std::left << std::setw(mw) << "Length" << std::right;
  for (int b = 0; b < 3; ++b) {
    out << " | ";
    for (const auto& row : lengths) out << std::setw(8) << row.length;
  }
  out << '\n';
  for (const auto& r : reports) {
    out << std::left << std::setw(mw) << r.method << std::right << std::fixed;
    out << " | ";
    for (const auto& row : r.rows) out << std::setw(8) << std::setprecision(2) << row.l2q;
    out << " | ";
    for (const auto& row : r.rows) out << std::setw(8) << std::setprecision(2) << row.l2p;
    out << " | ";
    for (const auto& row : r.rows) out << std::setw(8) << std::setprecision(4) << row.npss;
    out << '\n';
    out.unsetf(std::ios::floatfield);
  }
  out << "windows: " << reports.front().window_count << "\nconfig: " << reports.front().fingerprint << '\n';
}

}  // namespace inbetween
