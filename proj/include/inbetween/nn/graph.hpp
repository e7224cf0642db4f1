#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "inbetween/core/quaternion.hpp"
#include "inbetween/core/skeleton.hpp"
#include "inbetween/nn/tensor.hpp"

namespace inbetween::nn {

struct Var {
  std::size_t id = 0;
};

class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline constexpr double kPluAlpha = 0.1;
inline constexpr double kPluC = 1.0;

// Tape-based reverse-mode differentiation over rank-2 tensors. Nodes are appended in
// evaluation order, so every node's inputs precede it and the tape is acyclic.
template <class T>
class Graph {
 public:
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Map = Eigen::Map<Matrix>;
  using CMap = Eigen::Map<const Matrix>;

  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }

  const Tensor<T>& value(Var v) const { return nodes_.at(v.id).value; }
  const Tensor<T>& grad(Var v) const { return nodes_.at(v.id).grad; }
  T scalar(Var v) const { return nodes_.at(v.id).value.values.at(0); }
  bool requires_grad(Var v) const { return nodes_.at(v.id).needs_grad; }

  Var constant(Tensor<T> t) { return push(std::move(t), {}, false, nullptr); }

  // One node per parameter per graph; repeated uses share it and accumulate gradients.
  Var param(Parameter<T>& p) {
    if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{it->second};
    Var v = push(p.value, {}, grad_enabled_, nullptr);
    nodes_[v.id].param = &p;
    param_nodes_[&p] = v.id;
    return v;
  }

  Var matmul(Var a, Var b) {
    const auto& A = value(a);
    const auto& B = value(b);
    if (A.cols() != B.rows()) {
      throw GraphError("matmul shape mismatch " + shape_string(A.rows(), A.cols()) + " x " +
                       shape_string(B.rows(), B.cols()));
    }
    Tensor<T> out(A.rows(), B.cols());
    Map(out.data(), out.rows(), out.cols()).noalias() = cmap(A) * cmap(B);
    return push(std::move(out), {a, b}, any({a, b}), [a, b](Graph& g, std::size_t self) {
      const CMap G = g.cmap(g.nodes_[self].grad);
      if (g.needs(a)) g.gmap(a).noalias() += G * g.cmap(g.value(b)).transpose();
      if (g.needs(b)) g.gmap(b).noalias() += g.cmap(g.value(a)).transpose() * G;
    });
  }

  Var add(Var a, Var b) {
    check_same(a, b, "add");
    Tensor<T> out = value(a);
    const auto& B = value(b);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += B.values[i];
    return push(std::move(out), {a, b}, any({a, b}), [a, b](Graph& g, std::size_t self) {
      const auto& G = g.nodes_[self].grad.values;
      for (Var in : {a, b}) {
        if (!g.needs(in)) continue;
        auto& d = g.grad_ref(in).values;
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += G[i];
      }
    });
  }

  Var sub(Var a, Var b) {
    check_same(a, b, "sub");
    Tensor<T> out = value(a);
    const auto& B = value(b);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] -= B.values[i];
    return push(std::move(out), {a, b}, any({a, b}), [a, b](Graph& g, std::size_t self) {
      const auto& G = g.nodes_[self].grad.values;
      if (g.needs(a)) {
        auto& d = g.grad_ref(a).values;
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += G[i];
      }
      if (g.needs(b)) {
        auto& d = g.grad_ref(b).values;
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= G[i];
      }
    });
  }

  Var mul(Var a, Var b) {
    check_same(a, b, "mul");
    Tensor<T> out = value(a);
    const auto& B = value(b);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] *= B.values[i];
    return push(std::move(out), {a, b}, any({a, b}), [a, b](Graph& g, std::size_t self) {
      const auto& G = g.nodes_[self].grad.values;
      if (g.needs(a)) {
        auto& d = g.grad_ref(a).values;
        const auto& bv = g.value(b).values;
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += G[i] * bv[i];
      }
      if (g.needs(b)) {
        auto& d = g.grad_ref(b).values;
        const auto& av = g.value(a).values;
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += G[i] * av[i];
      }
    });
  }

  // a[m,n] + row[1,n] broadcast over rows.
  Var add_row(Var a, Var row) {
    const auto& A = value(a);
    const auto& R = value(row);
    if (R.rows() != 1 || R.cols() != A.cols()) {
      throw GraphError("add_row shape mismatch " + shape_string(A.rows(), A.cols()) + " + " +
                       shape_string(R.rows(), R.cols()));
    }
    Tensor<T> out = A;
    const std::size_t n = A.cols();
    for (std::size_t r = 0; r < A.rows(); ++r)
      for (std::size_t c = 0; c < n; ++c) out.values[r * n + c] += R.values[c];
    return push(std::move(out), {a, row}, any({a, row}), [a, row, n](Graph& g, std::size_t self) {
      const auto& G = g.nodes_[self].grad.values;
      if (g.needs(a)) {
        auto& d = g.grad_ref(a).values;
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += G[i];
      }
      if (g.needs(row)) {
        auto& d = g.grad_ref(row).values;
        for (std::size_t i = 0; i < G.size(); ++i) d[i % n] += G[i];
      }
    });
  }

  Var scale(Var a, T s) {
    Tensor<T> out = value(a);
    for (auto& v : out.values) v *= s;
    return push(std::move(out), {a}, any({a}), [a, s](Graph& g, std::size_t self) {
      const auto& G = g.nodes_[self].grad.values;
      auto& d = g.grad_ref(a).values;
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += s * G[i];
    });
  }

  Var add_scalar(Var a, T s) {
    Tensor<T> out = value(a);
    for (auto& v : out.values) v += s;
    return push(std::move(out), {a}, any({a}), [a](Graph& g, std::size_t self) {
      const auto& G = g.nodes_[self].grad.values;
      auto& d = g.grad_ref(a).values;
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += G[i];
    });
  }

  Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw GraphError("concat_cols of nothing");
    const std::size_t rows = value(parts[0]).rows();
    std::size_t cols = 0;
    for (Var p : parts) {
      if (value(p).rows() != rows) throw GraphError("concat_cols row mismatch");
      cols += value(p).cols();
    }
    Tensor<T> out(rows, cols);
    std::size_t c0 = 0;
    for (Var p : parts) {
      const auto& P = value(p);
      for (std::size_t r = 0; r < rows; ++r)
        std::copy_n(P.values.begin() + r * P.cols(), P.cols(), out.values.begin() + r * cols + c0);
      c0 += P.cols();
    }
    return push(std::move(out), parts, any(parts), [parts, rows, cols](Graph& g, std::size_t self) {
      const auto& G = g.nodes_[self].grad.values;
      std::size_t c0 = 0;
      for (Var p : parts) {
        const std::size_t pc = g.value(p).cols();
        if (g.needs(p)) {
          auto& d = g.grad_ref(p).values;
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < pc; ++c) d[r * pc + c] += G[r * cols + c0 + c];
        }
        c0 += pc;
      }
    });
  }

  Var slice_cols(Var a, std::size_t begin, std::size_t end) {
    const auto& A = value(a);
    if (begin > end || end > A.cols()) throw GraphError("slice_cols out of range");
    const std::size_t rows = A.rows(), cols = A.cols(), w = end - begin;
    Tensor<T> out(rows, w);
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(A.values.begin() + r * cols + begin, w, out.values.begin() + r * w);
    return push(std::move(out), {a}, any({a}), [a, begin, rows, cols, w](Graph& g, std::size_t self) {
      const auto& G = g.nodes_[self].grad.values;
      auto& d = g.grad_ref(a).values;
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < w; ++c) d[r * cols + begin + c] += G[r * w + c];
    });
  }

  Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw GraphError("concat_rows of nothing");
    const std::size_t cols = value(parts[0]).cols();
    std::size_t rows = 0;
    for (Var p : parts) {
      if (value(p).cols() != cols) throw GraphError("concat_rows column mismatch");
      rows += value(p).rows();
    }
    Tensor<T> out(rows, cols);
    std::size_t off = 0;
    for (Var p : parts) {
      const auto& P = value(p).values;
      std::copy(P.begin(), P.end(), out.values.begin() + off);
      off += P.size();
    }
    return push(std::move(out), parts, any(parts), [parts](Graph& g, std::size_t self) {
      const auto& G = g.nodes_[self].grad.values;
      std::size_t off = 0;
      for (Var p : parts) {
        const std::size_t n = g.value(p).size();
        if (g.needs(p)) {
          auto& d = g.grad_ref(p).values;
          for (std::size_t i = 0; i < n; ++i) d[i] += G[off + i];
        }
        off += n;
      }
    });
  }

  Var slice_rows(Var a, std::size_t begin, std::size_t end) {
    const auto& A = value(a);
    if (begin > end || end > A.rows()) throw GraphError("slice_rows out of range");
    const std::size_t cols = A.cols();
    Tensor<T> out(end - begin, cols);
    std::copy(A.values.begin() + begin * cols, A.values.begin() + end * cols, out.values.begin());
    return push(std::move(out), {a}, any({a}), [a, begin, cols](Graph& g, std::size_t self) {
      const auto& G = g.nodes_[self].grad.values;
      auto& d = g.grad_ref(a).values;
      for (std::size_t i = 0; i < G.size(); ++i) d[begin * cols + i] += G[i];
    });
  }

  Var reshape(Var a, std::size_t rows, std::size_t cols) {
    Tensor<T> out = value(a);
    if (rows * cols != out.size()) throw GraphError("reshape changes element count");
    out.shape = {rows, cols};
    return push(std::move(out), {a}, any({a}), [a](Graph& g, std::size_t self) {
      const auto& G = g.nodes_[self].grad.values;
      auto& d = g.grad_ref(a).values;
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += G[i];
    });
  }

  Var sigmoid(Var a) {
    return unary(a, [](T x) { return T(1) / (T(1) + std::exp(-x)); },
                 [](T, T y) { return y * (T(1) - y); });
  }
  Var tanh(Var a) {
    return unary(a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
  }
  Var relu(Var a) {
    return unary(a, [](T x) { return x > T(0) ? x : T(0); }, [](T x, T) { return x > T(0) ? T(1) : T(0); });
  }
  Var plu(Var a, T alpha = T(kPluAlpha), T c = T(kPluC)) {
    return unary(
        a,
        [alpha, c](T x) { return std::max(alpha * (x + c) - c, std::min(alpha * (x - c) + c, x)); },
        [alpha, c](T x, T) { return (x > c || x < -c) ? alpha : T(1); });
  }
  // Sign subgradient, 0 at 0.
  Var abs(Var a) {
    return unary(a, [](T x) { return std::abs(x); },
                 [](T x, T) { return x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0)); });
  }
  Var square(Var a) {
    return unary(a, [](T x) { return x * x; }, [](T x, T) { return T(2) * x; });
  }

  Var sum(Var a) {
    T s = 0;
    for (T v : value(a).values) s += v;
    return push(Tensor<T>(1, 1, s), {a}, any({a}), [a](Graph& g, std::size_t self) {
      const T G = g.nodes_[self].grad.values[0];
      for (auto& d : g.grad_ref(a).values) d += G;
    });
  }

  Var mean(Var a) {
    const auto n = static_cast<T>(value(a).size());
    return scale(sum(a), T(1) / n);
  }

  // L1 norm of the whole tensor.
  Var l1_norm(Var a) { return sum(abs(a)); }

  // [m,n] -> [1,n] column means.
  Var mean_rows(Var a) {
    const auto& A = value(a);
    const std::size_t m = A.rows(), n = A.cols();
    Tensor<T> out(1, n);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) out.values[c] += A.values[r * n + c];
    for (auto& v : out.values) v /= static_cast<T>(m);
    return push(std::move(out), {a}, any({a}), [a, m, n](Graph& g, std::size_t self) {
      const auto& G = g.nodes_[self].grad.values;
      auto& d = g.grad_ref(a).values;
      const T inv = T(1) / static_cast<T>(m);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) d[r * n + c] += G[c] * inv;
    });
  }

  // Normalizes each consecutive group of 4 columns to unit length.
  Var normalize_quats(Var a) {
    const auto& A = value(a);
    if (A.cols() % 4 != 0) throw GraphError("normalize_quats needs a multiple of 4 columns");
    Tensor<T> out = A;
    std::vector<T> norms(A.size() / 4);
    for (std::size_t q = 0; q < norms.size(); ++q) {
      T* v = out.values.data() + 4 * q;
      const T n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
      if (!(n > T(0)) || !std::isfinite(n)) throw DegenerateQuaternion("normalize_quats: zero-norm quaternion");
      norms[q] = n;
      for (int c = 0; c < 4; ++c) v[c] /= n;
    }
    return push(std::move(out), {a}, any({a}), [a, norms = std::move(norms)](Graph& g, std::size_t self) {
      const auto& G = g.nodes_[self].grad.values;
      const auto& Y = g.nodes_[self].value.values;
      auto& d = g.grad_ref(a).values;
      for (std::size_t q = 0; q < norms.size(); ++q) {
        const std::size_t o = 4 * q;
        T yg = 0;
        for (int c = 0; c < 4; ++c) yg += Y[o + c] * G[o + c];
        for (int c = 0; c < 4; ++c) d[o + c] += (G[o + c] - Y[o + c] * yg) / norms[q];
      }
    });
  }

  // Forward kinematics: q [m, 4j] local quaternions, r [m, 3] root positions -> [m, 3j] positions.
  Var fk(Var q, Var r, const Skeleton& skeleton) {
    const auto& Q = value(q);
    const auto& R = value(r);
    const std::size_t j = static_cast<std::size_t>(skeleton.joint_count());
    if (Q.cols() != 4 * j || R.cols() != 3 || Q.rows() != R.rows()) throw GraphError("fk shape mismatch");
    const std::size_t m = Q.rows();
    auto parents = skeleton.parents;
    std::vector<Vec3T<T>> offsets(j);
    for (std::size_t k = 0; k < j; ++k) {
      const auto& o = skeleton.offsets[k];
      offsets[k] = {static_cast<T>(o.x), static_cast<T>(o.y), static_cast<T>(o.z)};
    }
    Tensor<T> out(m, 3 * j);
    std::vector<QuatT<T>> globals(m * j);
    for (std::size_t row = 0; row < m; ++row) {
      const T* qv = Q.data() + row * 4 * j;
      T* pv = out.data() + row * 3 * j;
      QuatT<T>* gl = globals.data() + row * j;
      gl[0] = {qv[0], qv[1], qv[2], qv[3]};
      for (int c = 0; c < 3; ++c) pv[c] = R.values[row * 3 + c];
      for (std::size_t k = 1; k < j; ++k) {
        const std::size_t par = static_cast<std::size_t>(parents[k]);
        const QuatT<T> qk{qv[4 * k], qv[4 * k + 1], qv[4 * k + 2], qv[4 * k + 3]};
        gl[k] = quat_mul(gl[par], qk);
        const Vec3T<T> rot = quat_rotate(gl[par], offsets[k]);
        for (int c = 0; c < 3; ++c) pv[3 * k + c] = pv[3 * par + c] + rot[c];
      }
    }
    return push(std::move(out), {q, r}, any({q, r}),
                [q, r, m, j, parents = std::move(parents), offsets = std::move(offsets),
                 globals = std::move(globals)](Graph& g, std::size_t self) {
                  const auto& G = g.nodes_[self].grad.values;
                  const auto& Q = g.value(q).values;
                  const bool nq = g.needs(q), nr = g.needs(r);
                  T* dq = nq ? g.grad_ref(q).values.data() : nullptr;
                  T* dr = nr ? g.grad_ref(r).values.data() : nullptr;
                  std::vector<Vec3T<T>> dp(j);
                  std::vector<QuatT<T>> dg(j);
                  for (std::size_t row = 0; row < m; ++row) {
                    const QuatT<T>* gl = globals.data() + row * j;
                    const T* qv = Q.data() + row * 4 * j;
                    for (std::size_t k = 0; k < j; ++k) {
                      dp[k] = {G[row * 3 * j + 3 * k], G[row * 3 * j + 3 * k + 1], G[row * 3 * j + 3 * k + 2]};
                      dg[k] = {T(0), T(0), T(0), T(0)};
                    }
                    for (std::size_t k = j - 1; k >= 1; --k) {
                      const std::size_t par = static_cast<std::size_t>(parents[k]);
                      dp[par] += dp[k];
                      // rotate(g_par, b_k)
                      const QuatT<T>& a = gl[par];
                      const Vec3T<T> u = a.vec(), v = offsets[k], Gp = dp[k];
                      const Vec3T<T> t = cross(u, v) * T(2);
                      const T dw = dot(t, Gp);
                      const Vec3T<T> du = cross(v, Gp) * (T(2) * a.w) + cross(t, Gp) + cross(v, cross(Gp, u)) * T(2);
                      dg[par] = dg[par] + QuatT<T>{dw, du.x, du.y, du.z};
                      // g_k = g_par * q_k
                      const QuatT<T> qk{qv[4 * k], qv[4 * k + 1], qv[4 * k + 2], qv[4 * k + 3]};
                      dg[par] = dg[par] + quat_mul(dg[k], qk.conjugate());
                      if (nq) {
                        const QuatT<T> d = quat_mul(a.conjugate(), dg[k]);
                        for (int c = 0; c < 4; ++c) dq[row * 4 * j + 4 * k + c] += d[c];
                      }
                    }
                    if (nq)
                      for (int c = 0; c < 4; ++c) dq[row * 4 * j + c] += dg[0][c];
                    if (nr)
                      for (int c = 0; c < 3; ++c) dr[row * 3 + c] += dp[0][c];
                  }
                });
  }

  // Reverse sweep from a scalar node; parameter gradients are accumulated into Parameter::grad.
  void backward(Var loss) {
    auto& L = nodes_.at(loss.id);
    if (L.value.size() != 1) throw GraphError("backward needs a scalar loss");
    if (!L.needs_grad) return;
    L.grad = Tensor<T>(L.value.rows(), L.value.cols(), T(1));
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.needs_grad || n.grad.values.empty()) continue;
      if (n.backward) n.backward(*this, i);
      if (n.param) {
        auto& pg = n.param->grad;
        if (!pg.same_shape(n.grad)) pg = Tensor<T>(n.grad.rows(), n.grad.cols());
        for (std::size_t k = 0; k < pg.size(); ++k) pg.values[k] += n.grad.values[k];
      }
    }
  }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    std::vector<Var> inputs;
    bool needs_grad = false;
    Parameter<T>* param = nullptr;
    std::function<void(Graph&, std::size_t)> backward;
  };

  CMap cmap(const Tensor<T>& t) const { return CMap(t.data(), t.rows(), t.cols()); }
  Map gmap(Var v) {
    auto& gt = grad_ref(v);
    return Map(gt.data(), gt.rows(), gt.cols());
  }

  bool needs(Var v) const { return nodes_[v.id].needs_grad; }

  bool any(std::initializer_list<Var> vs) const {
    for (Var v : vs)
      if (needs(v)) return true;
    return false;
  }
  bool any(const std::vector<Var>& vs) const {
    for (Var v : vs)
      if (needs(v)) return true;
    return false;
  }

  Tensor<T>& grad_ref(Var v) {
    Node& n = nodes_[v.id];
    if (n.grad.values.empty()) n.grad = Tensor<T>(n.value.rows(), n.value.cols());
    return n.grad;
  }

  void check_same(Var a, Var b, const char* op) const {
    if (!value(a).same_shape(value(b))) {
      throw GraphError(std::string(op) + " shape mismatch " + shape_string(value(a).rows(), value(a).cols()) +
                       " vs " + shape_string(value(b).rows(), value(b).cols()));
    }
  }

  template <class F, class D>
  Var unary(Var a, F f, D df) {
    Tensor<T> out = value(a);
    for (auto& v : out.values) v = f(v);
    return push(std::move(out), {a}, any({a}), [a, df](Graph& g, std::size_t self) {
      const auto& G = g.nodes_[self].grad.values;
      const auto& Y = g.nodes_[self].value.values;
      const auto& X = g.value(a).values;
      auto& d = g.grad_ref(a).values;
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += G[i] * df(X[i], Y[i]);
    });
  }

  Var push(Tensor<T> value, std::vector<Var> inputs, bool needs_grad,
           std::function<void(Graph&, std::size_t)> backward) {
    const std::size_t id = nodes_.size();
    for (Var in : inputs) {
      if (in.id >= id) throw GraphError("graph input refers to a node that does not exist yet");
    }
    Node n;
    n.value = std::move(value);
    n.needs_grad = grad_enabled_ && needs_grad;
    if (n.needs_grad) {
      n.inputs = std::move(inputs);
      n.backward = std::move(backward);
    }
    nodes_.push_back(std::move(n));
    return Var{id};
  }

  bool grad_enabled_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<T>*, std::size_t> param_nodes_;
};

}  // namespace inbetween::nn
