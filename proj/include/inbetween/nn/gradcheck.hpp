#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "inbetween/nn/graph.hpp"

namespace inbetween::nn {

struct BlockCheck {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradCheckReport {
  std::vector<BlockCheck> blocks;
  double tolerance = 1e-4;

  bool passed() const {
    return std::all_of(blocks.begin(), blocks.end(), [&](const BlockCheck& b) { return b.max_rel_error < tolerance; });
  }
  double worst() const {
    double w = 0;
    for (const auto& b : blocks) w = std::max(w, b.max_rel_error);
    return w;
  }
};

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Gradients smaller than this are compared in absolute terms.
  double floor = 1e-6;
  std::size_t max_entries_per_block = 0;  // 0 checks every entry
  std::uint64_t seed = 7;
};

// Compares reverse-mode gradients of `loss` against central finite differences.
// `loss` must build a fresh graph from the current parameter values.
inline GradCheckReport gradient_check(const std::function<Var(Graph<double>&)>& loss,
                                      const std::vector<Parameter<double>*>& params,
                                      const GradCheckOptions& opt = {}) {
  for (auto* p : params) p->zero_grad();
  {
    Graph<double> g;
    g.backward(loss(g));
  }
  auto eval = [&] {
    Graph<double> g(false);
    return g.scalar(loss(g));
  };
  GradCheckReport report;
  report.tolerance = opt.tolerance;
  std::mt19937_64 rng(opt.seed);
  for (auto* p : params) {
    BlockCheck b{p->name};
    std::vector<std::size_t> idx(p->value.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (opt.max_entries_per_block && idx.size() > opt.max_entries_per_block) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(opt.max_entries_per_block);
    }
    for (std::size_t i : idx) {
      const double orig = p->value.values[i];
      p->value.values[i] = orig + opt.step;
      const double up = eval();
      p->value.values[i] = orig - opt.step;
      const double down = eval();
      p->value.values[i] = orig;
      const double numeric = (up - down) / (2 * opt.step);
      const double analytic = p->grad.values[i];
      const double abs_err = std::abs(numeric - analytic);
      const double rel = abs_err / std::max({std::abs(numeric), std::abs(analytic), opt.floor});
      b.max_abs_error = std::max(b.max_abs_error, abs_err);
      b.max_rel_error = std::max(b.max_rel_error, rel);
      ++b.checked;
    }
    report.blocks.push_back(std::move(b));
  }
  return report;
}

}  // namespace inbetween::nn
