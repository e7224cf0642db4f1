#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "inbetween/data/features.hpp"
#include "inbetween/model/config.hpp"
#include "inbetween/nn/layers.hpp"

namespace inbetween {

// Selector matrices mapping flattened positions (j*3) to critic features.
template <class T>
struct CriticSelectors {
  nn::Tensor<T> root;      // 3j x 3
  nn::Tensor<T> relative;  // 3j x 3(j-1), joint minus root

  explicit CriticSelectors(int j) : root(3 * j, 3), relative(3 * j, 3 * (j - 1)) {
    for (int a = 0; a < 3; ++a) root(a, a) = T(1);
    for (int k = 1; k < j; ++k) {
      for (int a = 0; a < 3; ++a) {
        relative(3 * k + a, 3 * (k - 1) + a) = T(1);
        relative(a, 3 * (k - 1) + a) = T(-1);
      }
    }
  }
};

// Per-frame critic features from stacked positions (rows t*B + b) of S frames.
template <class T>
nn::Var critic_feature_graph(nn::Graph<T>& g, nn::Var positions, std::size_t S, std::size_t B,
                             const CriticSelectors<T>& sel) {
  if (S < 2) throw std::invalid_argument("critic features need at least two frames");
  nn::Var diff = g.sub(g.slice_rows(positions, B, S * B), g.slice_rows(positions, 0, (S - 1) * B));
  nn::Var vel = g.concat_rows({g.slice_rows(diff, 0, B), diff});
  nn::Var rs = g.constant(sel.relative);
  return g.concat_cols({g.matmul(vel, g.constant(sel.root)), g.matmul(positions, rs), g.matmul(vel, rs)});
}

// Feed-forward critic applied to every contiguous window of `window` frames.
template <class T>
struct Critic {
  int window = 10;
  int feature_dim = 0;
  nn::Mlp<T> mlp;

  Critic() = default;
  Critic(const std::string& name, int joints, int win, const CriticConfig& c)
      : window(win), feature_dim(critic_feature_dim(joints)) {
    mlp = nn::Mlp<T>(name,
                     {static_cast<std::size_t>(win * feature_dim), static_cast<std::size_t>(c.hidden1),
                      static_cast<std::size_t>(c.hidden2), 1},
                     nn::Activation::relu, nn::Activation::none);
  }

  void init(std::mt19937_64& rng) { mlp.init(rng); }
  void collect(std::vector<nn::Parameter<T>*>& out) { mlp.collect(out); }

  // features: (S*B) x F with rows t*B + b. Returns 1 x B mean window scores.
  nn::Var score(nn::Graph<T>& g, nn::Var features, std::size_t S, std::size_t B) {
    const std::size_t W = static_cast<std::size_t>(window);
    if (S < W) {
      throw std::invalid_argument("critic window " + std::to_string(W) + " exceeds sequence length " +
                                  std::to_string(S));
    }
    const std::size_t nW = S - W + 1;
    std::vector<nn::Var> cols;
    for (std::size_t o = 0; o < W; ++o) cols.push_back(g.slice_rows(features, o * B, (o + nW) * B));
    nn::Var windows = W == 1 ? cols[0] : g.concat_cols(cols);
    nn::Var s = mlp(g, windows);  // (nW*B) x 1
    return g.mean_rows(g.reshape(s, nW, B));
  }
};

// Scalar convenience used by tests and tools: mean window score of one plain feature sequence.
template <class T>
double critic_score(Critic<T>& c, const std::vector<std::vector<double>>& features) {
  const std::size_t S = features.size();
  if (S == 0) throw std::invalid_argument("critic_score: empty sequence");
  nn::Tensor<T> f(S, features[0].size());
  for (std::size_t t = 0; t < S; ++t)
    for (std::size_t d = 0; d < features[t].size(); ++d) f(t, d) = static_cast<T>(features[t][d]);
  nn::Graph<T> g(false);
  return static_cast<double>(g.scalar(c.score(g, g.constant(f), S, 1)));
}

}  // namespace inbetween
