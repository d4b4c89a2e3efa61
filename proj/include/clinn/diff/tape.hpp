#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "clinn/diff/scalar.hpp"

namespace clinn::diff {

class Tape;

/// Scalar handle into a reverse-mode Tape. A Var without a tape is a constant
/// and never creates nodes.
class Var {
 public:
  Var() = default;
  Var(double constant) : value_(constant) {}  // NOLINT(google-explicit-constructor)

  double value() const noexcept { return value_; }
  bool is_constant() const noexcept { return tape_ == nullptr; }
  Tape* tape() const noexcept { return tape_; }
  std::uint32_t index() const noexcept { return index_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t index, double value) : tape_(tape), index_(index), value_(value) {}

  Tape* tape_ = nullptr;
  std::uint32_t index_ = 0;
  double value_ = 0.0;
};

inline double value_of(const Var& x) { return x.value(); }

/// Append-only record of elementary operations with their local partials.
/// Single-threaded; clear() between uses.
class Tape {
 public:
  static constexpr std::uint32_t kNoParent = 0xffffffffu;

  Var variable(double value);

  /// Unary node: d(out)/d(a) = da.
  Var record(double value, const Var& a, double da);
  /// Binary node.
  Var record(double value, const Var& a, double da, const Var& b, double db);

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear() noexcept { nodes_.clear(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }

  /// Reverse sweep from several seeded outputs; returns one adjoint per node.
  std::vector<double> adjoints(std::span<const std::pair<Var, double>> seeds) const;
  std::vector<double> adjoints(const Var& output) const;

 private:
  struct Node {
    std::uint32_t a;
    std::uint32_t b;
    double da;
    double db;
  };
  std::vector<Node> nodes_;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);
inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }

Var tanh(const Var& x);
Var sigmoid(const Var& x);
Var sin(const Var& x);
Var abs(const Var& x);
Var square(const Var& x);
Var checked_sqrt(const Var& x);
Var hard_tanh(const Var& x, double lo, double hi);
inline Var checked_div(const Var& a, const Var& b) { return a / b; }

/// Name-based dispatch over the unary primitive set
/// ("tanh", "sigmoid", "sin", "abs", "square", "sqrt").
/// Throws UnsupportedPrimitive for anything else.
Var apply(std::string_view primitive, const Var& x);

/// Scalar loss built from Vars over a parameter vector.
using VarFunction = std::function<Var(std::span<const Var>)>;

struct ValueAndGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Reverse-mode gradient of `loss` at `params`; one entry per parameter.
ValueAndGradient loss_gradient(const VarFunction& loss, std::span<const double> params);

/// max_i |analytic_i - central_i| / max(1, |analytic_i|), central differences with `step`.
double finite_diff_check(const VarFunction& f, std::span<const double> point, double step);

}  // namespace clinn::diff
