#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "inbetween/nn/tensor.hpp"

namespace inbetween::nn {

struct AmsGradConfig {
  double lr = 0.001;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double eps = 1e-8;
};

template <class T>
struct MomentState {
  std::vector<T> m, v, v_hat;
};

// AMSGrad without bias correction: v_hat is the running element-wise maximum of v.
template <class T>
class AmsGrad {
 public:
  AmsGrad(std::vector<Parameter<T>*> params, AmsGradConfig cfg = {}) : params_(std::move(params)), cfg_(cfg) {
    state_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto n = params_[i]->value.size();
      state_[i].m.assign(n, T(0));
      state_[i].v.assign(n, T(0));
      state_[i].v_hat.assign(n, T(0));
    }
  }

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

  void step() {
    const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
    const T lr = static_cast<T>(cfg_.lr), eps = static_cast<T>(cfg_.eps);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = *params_[i];
      auto& s = state_[i];
      if (!p.grad.same_shape(p.value)) throw std::logic_error("gradient of " + p.name + " has the wrong shape");
      for (std::size_t k = 0; k < p.value.size(); ++k) {
        const T g = p.grad.values[k];
        s.m[k] = b1 * s.m[k] + (T(1) - b1) * g;
        s.v[k] = b2 * s.v[k] + (T(1) - b2) * g * g;
        s.v_hat[k] = std::max(s.v_hat[k], s.v[k]);
        p.value.values[k] -= lr * s.m[k] / (std::sqrt(s.v_hat[k]) + eps);
      }
    }
    ++steps_;
  }

  const AmsGradConfig& config() const { return cfg_; }
  std::size_t steps() const { return steps_; }
  std::vector<MomentState<T>>& state() { return state_; }
  const std::vector<MomentState<T>>& state() const { return state_; }
  void set_steps(std::size_t s) { steps_ = s; }
  const std::vector<Parameter<T>*>& params() const { return params_; }

 private:
  std::vector<Parameter<T>*> params_;
  AmsGradConfig cfg_;
  std::vector<MomentState<T>> state_;
  std::size_t steps_ = 0;
};

}  // namespace inbetween::nn
