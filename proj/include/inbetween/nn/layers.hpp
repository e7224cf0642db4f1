#pragma once

#include <random>
#include <string>
#include <vector>

#include "inbetween/nn/graph.hpp"

namespace inbetween::nn {

enum class Activation { none, relu, plu, tanh, sigmoid };

template <class T>
Var activate(Graph<T>& g, Var x, Activation a) {
  switch (a) {
    case Activation::relu: return g.relu(x);
    case Activation::plu: return g.plu(x);
    case Activation::tanh: return g.tanh(x);
    case Activation::sigmoid: return g.sigmoid(x);
    case Activation::none: break;
  }
  return x;
}

template <class T>
struct Linear {
  Parameter<T> weight;  // [in, out]
  Parameter<T> bias;    // [1, out]

  Linear() = default;
  Linear(const std::string& name, std::size_t in, std::size_t out)
      : weight(name + ".weight", in, out), bias(name + ".bias", 1, out) {}

  std::size_t in() const { return weight.value.rows(); }
  std::size_t out() const { return weight.value.cols(); }

  void init(std::mt19937_64& rng) {
    init_uniform(weight, in(), rng);
    init_uniform(bias, in(), rng);
  }

  Var operator()(Graph<T>& g, Var x) { return g.add_row(g.matmul(x, g.param(weight)), g.param(bias)); }

  void collect(std::vector<Parameter<T>*>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

// Stack of linear layers; `hidden` activation on every layer but the last, which uses `last`.
template <class T>
struct Mlp {
  std::vector<Linear<T>> layers;
  Activation hidden = Activation::relu;
  Activation last = Activation::none;

  Mlp() = default;
  Mlp(const std::string& name, const std::vector<std::size_t>& widths, Activation hidden_act, Activation last_act)
      : hidden(hidden_act), last(last_act) {
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
      layers.emplace_back(name + "." + std::to_string(i), widths[i], widths[i + 1]);
    }
  }

  void init(std::mt19937_64& rng) {
    for (auto& l : layers) l.init(rng);
  }

  Var operator()(Graph<T>& g, Var x) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      x = activate(g, layers[i](g, x), i + 1 == layers.size() ? last : hidden);
    }
    return x;
  }

  void collect(std::vector<Parameter<T>*>& out) {
    for (auto& l : layers) l.collect(out);
  }
};

template <class T>
struct LstmState {
  Var h;
  Var cell;
};

// Gate layout along the 4H axis: input, forget, candidate, output.
template <class T>
struct Lstm {
  Parameter<T> w_input;   // [in, 4H]
  Parameter<T> w_hidden;  // [H, 4H]
  Parameter<T> bias;      // [1, 4H]

  Lstm() = default;
  Lstm(const std::string& name, std::size_t in, std::size_t hidden)
      : w_input(name + ".w_input", in, 4 * hidden),
        w_hidden(name + ".w_hidden", hidden, 4 * hidden),
        bias(name + ".bias", 1, 4 * hidden) {}

  std::size_t hidden_size() const { return w_hidden.value.rows(); }
  std::size_t input_size() const { return w_input.value.rows(); }

  void init(std::mt19937_64& rng) {
    init_uniform(w_input, input_size(), rng);
    init_uniform(w_hidden, hidden_size(), rng);
    init_uniform(bias, hidden_size(), rng);
    const std::size_t H = hidden_size();
    for (std::size_t c = H; c < 2 * H; ++c) bias.value.values[c] += T(1);
  }

  LstmState<T> zero_state(Graph<T>& g, std::size_t batch) {
    return {g.constant(Tensor<T>(batch, hidden_size())), g.constant(Tensor<T>(batch, hidden_size()))};
  }

  LstmState<T> step(Graph<T>& g, Var x, const LstmState<T>& s) {
    const std::size_t H = hidden_size();
    if (g.value(x).cols() != input_size()) {
      throw GraphError("lstm input width " + std::to_string(g.value(x).cols()) + ", expected " +
                       std::to_string(input_size()));
    }
    Var z = g.add_row(g.add(g.matmul(x, g.param(w_input)), g.matmul(s.h, g.param(w_hidden))), g.param(bias));
    Var i = g.sigmoid(g.slice_cols(z, 0, H));
    Var f = g.sigmoid(g.slice_cols(z, H, 2 * H));
    Var c = g.tanh(g.slice_cols(z, 2 * H, 3 * H));
    Var o = g.sigmoid(g.slice_cols(z, 3 * H, 4 * H));
    Var cell = g.add(g.mul(f, s.cell), g.mul(i, c));
    Var h = g.mul(o, g.tanh(cell));
    return {h, cell};
  }

  void collect(std::vector<Parameter<T>*>& out) {
    out.push_back(&w_input);
    out.push_back(&w_hidden);
    out.push_back(&bias);
  }
};

}  // namespace inbetween::nn
