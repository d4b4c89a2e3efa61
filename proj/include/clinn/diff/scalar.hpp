#pragma once

// Plain double overloads of the primitive set, so templated code can call
// tanh/sigmoid/square/... unqualified for double, Var and Dual<T> alike.

#include <cmath>
#include <string>

#include "clinn/error.hpp"

namespace clinn::diff {

/// Denominators (and square-root derivative denominators) below this raise.
inline constexpr double kGuard = 1e-12;

inline double value_of(double x) { return x; }

inline double checked_div(double a, double b) {
  if (std::abs(b) < kGuard) {
    throw NumericalError("guarded division: |denominator| = " + std::to_string(std::abs(b)) +
                         " < 1e-12");
  }
  return a / b;
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double square(double x) { return x * x; }

/// HardTanh(x; lo, hi): clamps x into [lo, hi].
inline double hard_tanh(double x, double lo, double hi) {
  if (x < lo) return lo;
  if (x > hi) return hi;
  return x;
}

inline double checked_sqrt(double x) {
  if (x < 0.0 || 2.0 * std::sqrt(x) < kGuard) {
    throw NumericalError("guarded sqrt: argument " + std::to_string(x) + " too small");
  }
  return std::sqrt(x);
}

}  // namespace clinn::diff
