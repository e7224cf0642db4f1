#pragma once

#include <stdexcept>
#include <vector>

#include "inbetween/nn/graph.hpp"

namespace inbetween {

// Mean absolute error over every element (time and feature dimensions).
template <class T>
nn::Var l1_mean(nn::Graph<T>& g, nn::Var pred, nn::Var truth) {
  if (!g.value(pred).same_shape(g.value(truth))) throw std::invalid_argument("l1_mean: shape mismatch");
  return g.mean(g.abs(g.sub(pred, truth)));
}

// Positions are compared after division by the per-dimension std; centering cancels in the difference.
template <class T>
nn::Var position_loss(nn::Graph<T>& g, nn::Var pred_pos, nn::Var true_pos, const std::vector<double>& std_dev) {
  const auto& P = g.value(pred_pos);
  if (!P.same_shape(g.value(true_pos))) throw std::invalid_argument("position_loss: shape mismatch");
  if (std_dev.size() != P.cols()) throw std::invalid_argument("position_loss: stats do not match joint count");
  nn::Tensor<T> inv(P.rows(), P.cols());
  for (std::size_t r = 0; r < P.rows(); ++r)
    for (std::size_t c = 0; c < P.cols(); ++c) inv(r, c) = static_cast<T>(1.0 / std_dev[c]);
  return g.mean(g.abs(g.mul(g.sub(pred_pos, true_pos), g.constant(inv))));
}

// Least-squares adversarial terms on per-sequence scores (1 x B).
template <class T>
nn::Var lsgan_generator(nn::Graph<T>& g, nn::Var fake_scores) {
  return g.scale(g.mean(g.square(g.add_scalar(fake_scores, T(-1)))), T(0.5));
}

template <class T>
nn::Var lsgan_critic(nn::Graph<T>& g, nn::Var real_scores, nn::Var fake_scores) {
  return g.add(g.scale(g.mean(g.square(g.add_scalar(real_scores, T(-1)))), T(0.5)),
               g.scale(g.mean(g.square(fake_scores)), T(0.5)));
}

struct LossComponents {
  double quat = 0, root = 0, pos = 0, contacts = 0, gen = 0, disc = 0, total = 0;
};

}  // namespace inbetween
