#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <type_traits>

#include "clinn/diff/scalar.hpp"
#include "clinn/diff/tape.hpp"

namespace clinn::diff {

/// Forward-mode dual number over up to kMaxTangents seeded directions.
///
/// T is the underlying scalar: double for plain forward mode, Var when the
/// dual arithmetic itself is recorded on a Tape (input derivatives that stay
/// differentiable with respect to parameters).
///
/// A dual built from a bare scalar has zero tangents and adopts the size of
/// whatever it is combined with; two sized duals must agree.
template <class T>
class Dual {
 public:
  static constexpr std::size_t kMaxTangents = 4;

  Dual() = default;
  Dual(const T& value) : value_(value) {}  // NOLINT(google-explicit-constructor)
  Dual(const T& value, std::size_t n) : value_(value), n_(checked_size(n)) {}

  /// Independent variable: tangent e_i in an n-dimensional direction space.
  static Dual variable(const T& value, std::size_t n, std::size_t i) {
    Dual d(value, n);
    if (i >= n) throw InvalidArgument("Dual::variable: seed index out of range");
    d.tan_[i] = T(1.0);
    return d;
  }

  const T& value() const noexcept { return value_; }
  std::size_t size() const noexcept { return n_; }
  const T& tangent(std::size_t i) const { return tan_[i]; }
  T& tangent(std::size_t i) { return tan_[i]; }

  /// (g(a), g'(a) * a_dot), given g(a) and g'(a) already evaluated.
  Dual chain(const T& g, const T& dg) const {
    Dual r(g, n_);
    for (std::size_t i = 0; i < n_; ++i) r.tan_[i] = dg * tan_[i];
    return r;
  }

  friend Dual operator+(const Dual& a, const Dual& b) {
    Dual r(a.value_ + b.value_, joint(a, b));
    for (std::size_t i = 0; i < r.n_; ++i) r.tan_[i] = a.tan_[i] + b.tan_[i];
    return r;
  }
  friend Dual operator-(const Dual& a, const Dual& b) {
    Dual r(a.value_ - b.value_, joint(a, b));
    for (std::size_t i = 0; i < r.n_; ++i) r.tan_[i] = a.tan_[i] - b.tan_[i];
    return r;
  }
  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r(a.value_ * b.value_, joint(a, b));
    for (std::size_t i = 0; i < r.n_; ++i) r.tan_[i] = a.value_ * b.tan_[i] + a.tan_[i] * b.value_;
    return r;
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    const T q = checked_div(a.value_, b.value_);
    Dual r(q, joint(a, b));
    for (std::size_t i = 0; i < r.n_; ++i) r.tan_[i] = (a.tan_[i] - q * b.tan_[i]) / b.value_;
    return r;
  }
  friend Dual operator-(const Dual& a) {
    Dual r(-a.value_, a.n_);
    for (std::size_t i = 0; i < a.n_; ++i) r.tan_[i] = -a.tan_[i];
    return r;
  }

  // Scalar-coefficient forms; cheaper than promoting the scalar to a Dual.
  friend Dual operator*(const Dual& a, const T& s) {
    Dual r(a.value_ * s, a.n_);
    for (std::size_t i = 0; i < a.n_; ++i) r.tan_[i] = a.tan_[i] * s;
    return r;
  }
  friend Dual operator*(const T& s, const Dual& a) { return a * s; }
  friend Dual operator+(const Dual& a, const T& s) {
    Dual r = a;
    r.value_ = a.value_ + s;
    return r;
  }
  friend Dual operator+(const T& s, const Dual& a) { return a + s; }
  friend Dual operator-(const Dual& a, const T& s) {
    Dual r = a;
    r.value_ = a.value_ - s;
    return r;
  }

  Dual& operator+=(const Dual& b) { return *this = *this + b; }

 private:
  static std::uint8_t checked_size(std::size_t n) {
    if (n > kMaxTangents) throw InvalidArgument("Dual: too many tangent directions");
    return static_cast<std::uint8_t>(n);
  }
  static std::size_t joint(const Dual& a, const Dual& b) {
    if (a.n_ == 0) return b.n_;
    if (b.n_ == 0 || a.n_ == b.n_) return a.n_;
    throw InvalidArgument("Dual: tangent sizes differ");
  }

  T value_{};
  std::array<T, kMaxTangents> tan_{};
  std::uint8_t n_ = 0;
};

template <class T>
double value_of(const Dual<T>& x) {
  return value_of(x.value());
}

template <class T>
Dual<T> checked_div(const Dual<T>& a, const Dual<T>& b) {
  return a / b;
}

template <class T>
Dual<T> tanh(const Dual<T>& x) {
  using std::tanh;
  const T y = tanh(x.value());
  return x.chain(y, T(1.0) - y * y);
}

template <class T>
Dual<T> sigmoid(const Dual<T>& x) {
  const T y = sigmoid(x.value());
  return x.chain(y, y * (T(1.0) - y));
}

template <class T>
Dual<T> sin(const Dual<T>& x) {
  using std::sin;
  // cos(a) = sin(a + pi/2) keeps the Var primitive set to sin only.
  return x.chain(sin(x.value()), sin(x.value() + T(M_PI / 2)));
}

template <class T>
Dual<T> square(const Dual<T>& x) {
  return x * x;
}

template <class T>
Dual<T> abs(const Dual<T>& x) {
  const double v = value_of(x.value());
  const double s = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  using std::abs;
  return x.chain(abs(x.value()), T(s));
}

template <class T>
Dual<T> checked_sqrt(const Dual<T>& x) {
  const T y = checked_sqrt(x.value());
  return x.chain(y, T(0.5) / y);
}

template <class T>
Dual<T> hard_tanh(const Dual<T>& x, double lo, double hi) {
  const double v = value_of(x.value());
  const bool inside = v >= lo && v <= hi;
  return x.chain(hard_tanh(x.value(), lo, hi), T(inside ? 1.0 : 0.0));
}

}  // namespace clinn::diff
