#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace inbetween {

template <class T>
struct Vec3T {
  T x{0}, y{0}, z{0};

  constexpr Vec3T() = default;
  constexpr Vec3T(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

  constexpr Vec3T operator+(const Vec3T& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3T operator-(const Vec3T& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3T operator-() const { return {-x, -y, -z}; }
  constexpr Vec3T operator*(T s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3T operator/(T s) const { return {x / s, y / s, z / s}; }
  Vec3T& operator+=(const Vec3T& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3T& operator-=(const Vec3T& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3T& operator*=(T s) { x *= s; y *= s; z *= s; return *this; }

  constexpr T operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  T& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
};

template <class T>
constexpr Vec3T<T> operator*(T s, const Vec3T<T>& v) { return v * s; }

template <class T>
constexpr T dot(const Vec3T<T>& a, const Vec3T<T>& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

template <class T>
constexpr Vec3T<T> cross(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <class T>
T norm(const Vec3T<T>& v) { return std::sqrt(dot(v, v)); }

using Vec3 = Vec3T<double>;

class DegenerateQuaternion : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Stored (w, x, y, z); Hamilton convention, active rotations.
template <class T>
struct QuatT {
  T w{1}, x{0}, y{0}, z{0};

  constexpr QuatT() = default;
  constexpr QuatT(T w_, T x_, T y_, T z_) : w(w_), x(x_), y(y_), z(z_) {}

  static constexpr QuatT identity() { return {}; }

  constexpr Vec3T<T> vec() const { return {x, y, z}; }
  constexpr QuatT conjugate() const { return {w, -x, -y, -z}; }
  constexpr QuatT operator-() const { return {-w, -x, -y, -z}; }
  constexpr QuatT operator+(const QuatT& o) const { return {w + o.w, x + o.x, y + o.y, z + o.z}; }
  constexpr QuatT operator-(const QuatT& o) const { return {w - o.w, x - o.x, y - o.y, z - o.z}; }
  constexpr QuatT operator*(T s) const { return {w * s, x * s, y * s, z * s}; }

  constexpr T operator[](int i) const { return i == 0 ? w : (i == 1 ? x : (i == 2 ? y : z)); }
  T& operator[](int i) { return i == 0 ? w : (i == 1 ? x : (i == 2 ? y : z)); }
};

using Quaternion = QuatT<double>;

template <class T>
constexpr T dot(const QuatT<T>& a, const QuatT<T>& b) {
  return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

template <class T>
T norm(const QuatT<T>& q) { return std::sqrt(dot(q, q)); }

template <class T>
QuatT<T> quat_normalize(const QuatT<T>& q) {
  const T n = norm(q);
  if (!(n > T(0)) || !std::isfinite(n)) {
    throw DegenerateQuaternion("cannot normalize a zero-norm or non-finite quaternion");
  }
  return q * (T(1) / n);
}

// Hamilton product a ⊗ b.
template <class T>
constexpr QuatT<T> quat_mul(const QuatT<T>& a, const QuatT<T>& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

// v' = v + w t + u × t with t = 2 u × v; exact for unit q.
template <class T>
constexpr Vec3T<T> quat_rotate(const QuatT<T>& q, const Vec3T<T>& v) {
  const Vec3T<T> u = q.vec();
  const Vec3T<T> t = cross(u, v) * T(2);
  return v + t * q.w + cross(u, t);
}

template <class T>
QuatT<T> quat_from_axis_angle(const Vec3T<T>& axis, T angle) {
  const T n = norm(axis);
  if (!(n > T(0))) throw DegenerateQuaternion("axis-angle with zero axis");
  const T s = std::sin(angle / T(2)) / n;
  return {std::cos(angle / T(2)), axis.x * s, axis.y * s, axis.z * s};
}

template <class T>
QuatT<T> quat_yaw(T angle) { return {std::cos(angle / T(2)), T(0), std::sin(angle / T(2)), T(0)}; }

// Sign-canonical form with w >= 0.
template <class T>
constexpr QuatT<T> quat_canonical(const QuatT<T>& q) { return q.w < T(0) ? -q : q; }

// Rotation angle between two unit quaternions, in [0, pi].
template <class T>
T quat_angle_between(const QuatT<T>& a, const QuatT<T>& b) {
  const T d = std::min(T(1), std::abs(dot(a, b)));
  return T(2) * std::acos(d);
}

// Shortest-arc spherical interpolation; near-parallel endpoints use normalized lerp.
template <class T>
QuatT<T> slerp(const QuatT<T>& a, QuatT<T> b, T t) {
  T d = dot(a, b);
  if (d < T(0)) {
    b = -b;
    d = -d;
  }
  if (d > T(1) - T(1e-10)) {
    return quat_normalize(a * (T(1) - t) + b * t);
  }
  const T theta = std::acos(std::min(d, T(1)));
  const T s = std::sin(theta);
  const T wa = std::sin((T(1) - t) * theta) / s;
  const T wb = std::sin(t * theta) / s;
  return quat_normalize(a * wa + b * wb);
}

template <class T>
struct Mat3T {
  T m[3][3]{};
};

template <class T>
Mat3T<T> quat_to_matrix(const QuatT<T>& q) {
  const T w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3T<T> r;
  r.m[0][0] = 1 - 2 * (y * y + z * z);
  r.m[0][1] = 2 * (x * y - w * z);
  r.m[0][2] = 2 * (x * z + w * y);
  r.m[1][0] = 2 * (x * y + w * z);
  r.m[1][1] = 1 - 2 * (x * x + z * z);
  r.m[1][2] = 2 * (y * z - w * x);
  r.m[2][0] = 2 * (x * z - w * y);
  r.m[2][1] = 2 * (y * z + w * x);
  r.m[2][2] = 1 - 2 * (x * x + y * y);
  return r;
}

template <class T>
QuatT<T> quat_from_matrix(const Mat3T<T>& r) {
  const auto& m = r.m;
  const T tr = m[0][0] + m[1][1] + m[2][2];
  QuatT<T> q;
  if (tr > T(0)) {
    const T s = std::sqrt(tr + T(1)) * T(2);
    q = {T(0.25) * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s};
  } else if (m[0][0] > m[1][1] && m[0][0] > m[2][2]) {
    const T s = std::sqrt(T(1) + m[0][0] - m[1][1] - m[2][2]) * T(2);
    q = {(m[2][1] - m[1][2]) / s, T(0.25) * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s};
  } else if (m[1][1] > m[2][2]) {
    const T s = std::sqrt(T(1) + m[1][1] - m[0][0] - m[2][2]) * T(2);
    q = {(m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, T(0.25) * s, (m[1][2] + m[2][1]) / s};
  } else {
    const T s = std::sqrt(T(1) + m[2][2] - m[0][0] - m[1][1]) * T(2);
    q = {(m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, T(0.25) * s};
  }
  return quat_normalize(q);
}

}  // namespace inbetween
