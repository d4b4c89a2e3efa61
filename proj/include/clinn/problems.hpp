#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clinn/diff/dual.hpp"
#include "clinn/error.hpp"

namespace clinn {

/// The seven benchmark cases. Labels "1A" .. "3B", "2D" are CLI-stable.
enum class CaseId : std::uint8_t { k1A, k1B, k2A, k2B, k3A, k3B, k2D };

std::string_view case_label(CaseId id);
/// Throws InvalidArgument for unknown labels.
CaseId parse_case(std::string_view label);
std::span<const CaseId> all_cases();

/// Scalar flux f and its characteristic speed f'.
struct Flux {
  enum class Kind : std::uint8_t { Burgers, Greenshields, BuckleyLeverett, Cubic };
  Kind kind = Kind::Burgers;
  double vmax = 1.0;  // Greenshields
  double umax = 1.0;  // Greenshields
  double m = 1.0;     // Buckley-Leverett viscosity ratio

  template <class T>
  T value(const T& u) const {
    using diff::checked_div;
    switch (kind) {
      case Kind::Burgers:
        return u * u * 0.5;
      case Kind::Greenshields:
        return u * vmax - u * u * (vmax / umax);
      case Kind::BuckleyLeverett: {
        const T w = T(1.0) - u;
        return checked_div(u * u, u * u + w * w * m);
      }
      case Kind::Cubic:
        return u * u * u * (1.0 / 3.0);
    }
    return u;
  }

  template <class T>
  T speed(const T& u) const {
    using diff::checked_div;
    switch (kind) {
      case Kind::Burgers:
        return u;
      case Kind::Greenshields:
        return T(vmax) - u * (2.0 * vmax / umax);
      case Kind::BuckleyLeverett: {
        const T w = T(1.0) - u;
        const T den = u * u + w * w * m;
        return checked_div(u * w * (2.0 * m), den * den);
      }
      case Kind::Cubic:
        return u * u;
    }
    return u;
  }
};

/// Initial data u0 on R^d. Piecewise data is a step function of the first
/// coordinate (1D) or of max(x, y) (2D), left-closed: at a breakpoint the
/// left level applies.
struct InitialData {
  enum class Kind : std::uint8_t { Sine, Ramp, Piecewise };
  Kind kind = Kind::Piecewise;
  std::vector<double> breaks;  // ascending
  std::vector<double> levels;  // breaks.size() + 1

  template <class T>
  T eval(std::span<const T> x) const {
    using diff::value_of;
    using std::sin;
    // Argument: x (1D) or the larger of x, y (2D).
    T arg = x[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
      if (value_of(x[i]) > value_of(arg)) arg = x[i];
    }
    const double a = value_of(arg);
    switch (kind) {
      case Kind::Sine:
        return sin(arg * M_PI) + 0.5;
      case Kind::Ramp:
        return (a >= -1.0 && a <= 3.0) ? arg * 3.0 : T(0.0);
      case Kind::Piecewise: {
        std::size_t k = 0;
        while (k < breaks.size() && a > breaks[k]) ++k;
        return T(levels[k]);
      }
    }
    return T(0.0);
  }
};

/// One benchmark problem: flux per space dimension, initial and boundary
/// data, box domain [lo, hi]^d x [0, t_end], and analytic bounds of u0.
struct ProblemSpec {
  CaseId id = CaseId::k1A;
  std::size_t dim = 1;
  std::vector<Flux> flux;  // f_1 .. f_d
  InitialData u0;
  std::vector<double> lo;  // per space dimension
  std::vector<double> hi;
  double t_end = 1.0;
  double u0_inf = 0.0;
  double u0_sup = 0.0;

  std::string_view label() const { return case_label(id); }
  std::size_t input_dim() const { return dim + 1; }

  double initial(std::span<const double> x) const { return u0.eval<double>(x); }
  /// Dirichlet data u_B(x, t) on the spatial boundary.
  double boundary(std::span<const double> x, double t) const;
  /// True when (x, t) lies in the closed space-time box (1e-12 slack).
  bool contains(std::span<const double> x, double t) const;
};

ProblemSpec get_problem(CaseId id);
ProblemSpec get_problem(std::string_view label);

/// lambda(u) = f'(u), one component per space dimension.
std::vector<double> lambda_eval(const ProblemSpec& spec, double u);

/// g(t) with g = sin(-pi t g) + 0.5: Newton from 0.5 to |residual| < 1e-12.
double solve_1a_boundary(double t);

enum class PointKind : std::uint8_t { Initial, Boundary, Interior };

/// Uniform tensor grid (endpoints included) with per-point class and RAR
/// weight. Points are ordered t-major, then y (2D), then x ascending;
/// coordinates are stored row-major as (x[, y], t).
struct CollocationSet {
  std::size_t dim = 1;
  std::size_t nx = 0;  // per space axis
  std::size_t nt = 0;
  std::vector<std::vector<double>> axes;  // per space dimension, nx values
  std::vector<double> times;              // nt values

  std::vector<double> coords;
  std::vector<PointKind> kind;
  std::vector<std::size_t> initial;        // P_I
  std::vector<std::size_t> boundary;       // P_B
  std::vector<std::size_t> interior;       // P_N
  std::vector<std::size_t> discontinuity;  // P_D (subset of P_N)
  std::vector<double> rar_weights;         // w_j, one per point

  std::size_t size() const noexcept { return kind.size(); }
  std::size_t input_dim() const noexcept { return dim + 1; }
  std::span<const double> point(std::size_t j) const {
    return std::span(coords).subspan(j * input_dim(), input_dim());
  }
  /// Point index of grid node (time k, y index iy, x index ix).
  std::size_t index(std::size_t k, std::size_t ix, std::size_t iy = 0) const {
    return dim == 1 ? k * nx + ix : (k * nx + iy) * nx + ix;
  }
  double spacing(std::size_t axis = 0) const { return axes[axis][1] - axes[axis][0]; }
  void reset_weights() { std::fill(rar_weights.begin(), rar_weights.end(), 1.0); }
};

/// Uniform grid with nx points per space axis and nt time levels.
CollocationSet sample_grid(const ProblemSpec& spec, std::size_t nx, std::size_t nt);

}  // namespace clinn
