#include "clinn/problems.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "clinn/oracle.hpp"

namespace clinn {

namespace {

constexpr std::array<CaseId, 7> kAllCases = {CaseId::k1A, CaseId::k1B, CaseId::k2A, CaseId::k2B,
                                             CaseId::k3A, CaseId::k3B, CaseId::k2D};
constexpr double kSlack = 1e-12;

Flux burgers() { return Flux{}; }

Flux greenshields(double vmax, double umax) {
  Flux f;
  f.kind = Flux::Kind::Greenshields;
  f.vmax = vmax;
  f.umax = umax;
  return f;
}

Flux kind_only(Flux::Kind k) {
  Flux f;
  f.kind = k;
  return f;
}

InitialData piecewise(std::vector<double> breaks, std::vector<double> levels) {
  return InitialData{InitialData::Kind::Piecewise, std::move(breaks), std::move(levels)};
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  v.back() = b;
  return v;
}

}  // namespace

std::string_view case_label(CaseId id) {
  switch (id) {
    case CaseId::k1A:
      return "1A";
    case CaseId::k1B:
      return "1B";
    case CaseId::k2A:
      return "2A";
    case CaseId::k2B:
      return "2B";
    case CaseId::k3A:
      return "3A";
    case CaseId::k3B:
      return "3B";
    case CaseId::k2D:
      return "2D";
  }
  return "?";
}

CaseId parse_case(std::string_view label) {
  for (CaseId id : kAllCases) {
    if (case_label(id) == label) return id;
  }
  throw InvalidArgument("unknown case '" + std::string(label) + "' (expected one of 1A 1B 2A 2B 3A 3B 2D)");
}

std::span<const CaseId> all_cases() { return kAllCases; }

ProblemSpec get_problem(CaseId id) {
  ProblemSpec p;
  p.id = id;
  switch (id) {
    case CaseId::k1A:
      p.flux = {burgers()};
      p.u0 = InitialData{InitialData::Kind::Sine, {}, {}};
      p.lo = {0.0};
      p.hi = {2.0};
      p.t_end = 0.4;
      p.u0_inf = -0.5;
      p.u0_sup = 1.5;
      break;
    case CaseId::k1B:
      p.flux = {burgers()};
      p.u0 = InitialData{InitialData::Kind::Ramp, {}, {}};
      p.lo = {-4.0};
      p.hi = {12.0};
      p.t_end = 4.0;
      p.u0_inf = -3.0;
      p.u0_sup = 9.0;
      break;
    case CaseId::k2A:
      p.flux = {greenshields(22.0, 22.0)};
      p.u0 = piecewise({-5.0, 4.0}, {1.0, 9.0, 19.0});
      p.lo = {-6.0};
      p.hi = {6.0};
      p.t_end = 2.0;
      p.u0_inf = 1.0;
      p.u0_sup = 19.0;
      break;
    case CaseId::k2B:
      p.flux = {greenshields(5.0, 5.0)};
      p.u0 = piecewise({-2.0, 2.0}, {2.0, 0.0, 4.0});
      p.lo = {-4.0};
      p.hi = {6.0};
      p.t_end = 6.0;
      p.u0_inf = 0.0;
      p.u0_sup = 4.0;
      break;
    case CaseId::k3A:
      p.flux = {kind_only(Flux::Kind::BuckleyLeverett)};
      p.u0 = piecewise({1.0}, {1.0, 0.0});
      p.lo = {0.0};
      p.hi = {4.0};
      p.t_end = 2.0;
      p.u0_inf = 0.0;
      p.u0_sup = 1.0;
      break;
    case CaseId::k3B:
      // Right level 2 so that the data match the closed-form solution.
      p.flux = {kind_only(Flux::Kind::Cubic)};
      p.u0 = piecewise({0.0, 1.0}, {-2.0, 1.5, 2.0});
      p.lo = {-1.0};
      p.hi = {3.0};
      p.t_end = 1.0;
      p.u0_inf = -2.0;
      p.u0_sup = 2.0;
      break;
    case CaseId::k2D:
      p.dim = 2;
      p.flux = {burgers(), burgers()};
      p.u0 = piecewise({-2.0, 2.0}, {1.0, 5.0, -3.0});
      p.lo = {-4.0, -4.0};
      p.hi = {6.0, 6.0};
      p.t_end = 6.0;
      p.u0_inf = -3.0;
      p.u0_sup = 5.0;
      break;
  }
  return p;
}

ProblemSpec get_problem(std::string_view label) { return get_problem(parse_case(label)); }

bool ProblemSpec::contains(std::span<const double> x, double t) const {
  if (x.size() != dim) return false;
  if (t < -kSlack || t > t_end + kSlack) return false;
  for (std::size_t i = 0; i < dim; ++i) {
    if (x[i] < lo[i] - kSlack || x[i] > hi[i] + kSlack) return false;
  }
  return true;
}

double ProblemSpec::boundary(std::span<const double> x, double t) const {
  switch (id) {
    case CaseId::k1A:
      return solve_1a_boundary(t);
    case CaseId::k2D:
      return oracle::exact(*this, x, t);
    default:
      return initial(x);  // data frozen at the t = 0 value
  }
}

std::vector<double> lambda_eval(const ProblemSpec& spec, double u) {
  std::vector<double> out;
  out.reserve(spec.flux.size());
  for (const Flux& f : spec.flux) out.push_back(f.speed(u));
  return out;
}

double solve_1a_boundary(double t) {
  if (t < -kSlack || t > 0.4 + kSlack) {
    std::ostringstream msg;
    msg << "solve_1a_boundary: t = " << t << " outside [0, 0.4]";
    throw InvalidArgument(msg.str());
  }
  double g = 0.5;
  for (int it = 0; it < 100; ++it) {
    const double r = g - std::sin(-M_PI * t * g) - 0.5;
    if (std::abs(r) < 1e-12) return g;
    const double dr = 1.0 + M_PI * t * std::cos(-M_PI * t * g);
    g -= r / dr;
  }
  throw NumericalError("solve_1a_boundary: Newton did not converge");
}

CollocationSet sample_grid(const ProblemSpec& spec, std::size_t nx, std::size_t nt) {
  if (nx < 2 || nt < 2) throw InvalidArgument("sample_grid: need nx >= 2 and nt >= 2");
  CollocationSet s;
  s.dim = spec.dim;
  s.nx = nx;
  s.nt = nt;
  for (std::size_t a = 0; a < spec.dim; ++a) s.axes.push_back(linspace(spec.lo[a], spec.hi[a], nx));
  s.times = linspace(0.0, spec.t_end, nt);

  const std::size_t ny = spec.dim == 2 ? nx : 1;
  const std::size_t total = nt * ny * nx;
  s.coords.reserve(total * s.input_dim());
  s.kind.reserve(total);
  for (std::size_t k = 0; k < nt; ++k) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      for (std::size_t ix = 0; ix < nx; ++ix) {
        const std::size_t j = s.kind.size();
        s.coords.push_back(s.axes[0][ix]);
        if (spec.dim == 2) s.coords.push_back(s.axes[1][iy]);
        s.coords.push_back(s.times[k]);
        const bool edge = ix == 0 || ix == nx - 1 || (spec.dim == 2 && (iy == 0 || iy == ny - 1));
        PointKind kind = k == 0 ? PointKind::Initial : (edge ? PointKind::Boundary : PointKind::Interior);
        s.kind.push_back(kind);
        switch (kind) {
          case PointKind::Initial:
            s.initial.push_back(j);
            break;
          case PointKind::Boundary:
            s.boundary.push_back(j);
            break;
          case PointKind::Interior:
            s.interior.push_back(j);
            break;
        }
      }
    }
  }
  s.rar_weights.assign(total, 1.0);
  return s;
}

}  // namespace clinn
