#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace inbetween::nn {

// Dense row-major tensor. Every op in the graph works on rank-2 views (rows x cols).
template <class T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> values;

  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, T fill = T(0)) : shape{rows, cols}, values(rows * cols, fill) {}
  Tensor(std::vector<std::size_t> s, std::vector<T> v) : shape(std::move(s)), values(std::move(v)) {
    const auto n = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    if (n != values.size()) throw std::invalid_argument("tensor values do not match shape");
  }

  static Tensor row(std::vector<T> v) {
    const auto n = v.size();
    return Tensor({1, n}, std::move(v));
  }

  std::size_t size() const { return values.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : (shape.size() == 1 ? 1 : shape[0]); }
  std::size_t cols() const { return shape.empty() ? 0 : shape.back(); }
  bool same_shape(const Tensor& o) const { return rows() == o.rows() && cols() == o.cols(); }

  T& operator()(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  T operator()(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  T* data() { return values.data(); }
  const T* data() const { return values.data(); }

  void fill(T v) { std::fill(values.begin(), values.end(), v); }
};

inline std::string shape_string(std::size_t r, std::size_t c) {
  return "[" + std::to_string(r) + "x" + std::to_string(c) + "]";
}

template <class T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter() = default;
  Parameter(std::string n, std::size_t rows, std::size_t cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols) {}

  void zero_grad() { grad = Tensor<T>(value.rows(), value.cols()); }
};

// Uniform in +-sqrt(1/fan_in).
template <class T>
void init_uniform(Parameter<T>& p, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : p.value.values) v = static_cast<T>(dist(rng));
}

}  // namespace inbetween::nn
