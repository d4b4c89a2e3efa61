#include "clinn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace clinn::oracle {

namespace {

constexpr double kContactTol = 1e-12;

/// Bisection for a root of g on [a, b] with g(a) <= 0 <= g(b) or the reverse.
template <class G>
double bisect(G g, double a, double b, double tol) {
  double ga = g(a);
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    const double m = 0.5 * (a + b);
    const double gm = g(m);
    if ((gm <= 0.0) == (ga <= 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// ---- case 1A --------------------------------------------------------------
//
// In the frame y = x - t/2 with w = u - 1/2 the problem is w_t + (w^2/2)_y = 0,
// w0 = sin(pi y): odd about y = 0 and y = 1, so the shock sits at y = 1 (mod 2).
// For y in [0, 1] the admissible foot point is the smallest root of
// eta + t sin(pi eta) = y in [0, 1]; it lies where that map is increasing.

double sine_burgers_w(double y, double t) {
  if (y == 0.0) return 0.0;
  auto g = [&](double eta) { return eta + t * std::sin(M_PI * eta) - y; };
  double hi = 1.0;
  if (M_PI * t > 1.0) hi = std::acos(-1.0 / (M_PI * t)) / M_PI;  // end of the increasing branch
  if (g(hi) < 0.0) hi = 1.0;  // only at y == 1 before the shock forms
  const double eta = bisect(g, 0.0, hi, 1e-15);
  return std::sin(M_PI * eta);
}

double exact_1a(double x, double t) {
  if (t == 0.0) return std::sin(M_PI * x) + 0.5;
  double y = x - 0.5 * t;
  while (y > 1.0) y -= 2.0;
  while (y <= -1.0) y += 2.0;
  const double w = y >= 0.0 ? sine_burgers_w(y, t) : -sine_burgers_w(-y, t);
  double u = w + 0.5;

  // Newton polish on the implicit relation; steps are only kept if they help.
  auto residual = [&](double v) { return v - std::sin(M_PI * (x - v * t)) - 0.5; };
  double r = residual(u);
  for (int it = 0; it < 3 && std::abs(r) > 0.0; ++it) {
    const double dr = 1.0 + M_PI * t * std::cos(M_PI * (x - u * t));
    if (std::abs(dr) < 1e-8) break;
    const double cand = u - r / dr;
    const double rc = residual(cand);
    if (std::abs(rc) >= std::abs(r)) break;
    u = cand;
    r = rc;
  }
  if (std::abs(r) > 1e-10) {
    std::ostringstream msg;
    msg << "case 1A root find did not converge at (x, t) = (" << x << ", " << t << "), residual " << r;
    throw NumericalError(msg.str());
  }
  return u;
}

// ---- closed forms as printed ----------------------------------------------

double exact_1b(double x, double t) {
  const double r = std::sqrt(1.0 + 3.0 * t);
  return (x > -r && x <= 3.0 * r) ? 3.0 * x / (1.0 + 3.0 * t) : 0.0;
}

double exact_2a(double x, double t) {
  if (t < 0.5) {
    if (x <= 12.0 * t - 5.0) return 1.0;
    if (x <= -6.0 * t + 4.0) return 9.0;
    return 19.0;
  }
  return x <= 2.0 * t ? 1.0 : 19.0;
}

// Shock lines are left-closed. For t >= 4 the left state holds up to x = 6 - t.
double exact_2b(double x, double t) {
  if (t == 0.0) return x <= -2.0 ? 2.0 : (x <= 2.0 ? 0.0 : 4.0);
  const double fan = 0.5 * (5.0 - (x + 2.0) / t);
  if (t < 1.0) {
    if (x < t - 2.0) return 2.0;
    if (x < 5.0 * t - 2.0) return fan;
    if (x <= t + 2.0) return 0.0;
    return 4.0;
  }
  if (t < 4.0) {
    if (x < t - 2.0) return 2.0;
    if (x <= -2.0 - 3.0 * t + 8.0 * std::sqrt(t)) return fan;
    return 4.0;
  }
  return x <= 6.0 - t ? 2.0 : 4.0;
}

double exact_3a(double x, double t) {
  if (x <= 1.0) return 1.0;
  if (t == 0.0) return 0.0;
  const double front = 1.0 + 0.5 * (std::sqrt(2.0) + 1.0) * t;
  if (x > front) return 0.0;
  const double xi = (x - 1.0) / t;
  const double inner = 1.0 - (2.0 * xi + 1.0 - std::sqrt(4.0 * xi + 1.0)) / xi;
  return 0.5 * (1.0 + std::sqrt(std::max(0.0, inner)));
}

// Right state 2 (not the printed initial level 1); see problems.cpp.
double exact_3b(double x, double t) {
  if (t == 0.0) return x < 0.0 ? -2.0 : (x < 1.0 ? 1.5 : 2.0);
  if (x <= t) return -2.0;
  if (x < 2.25 * t) return std::sqrt(x / t);
  if (x <= 2.25 * t + 1.0) return 1.5;
  if (x < 4.0 * t + 1.0) return std::sqrt((x - 1.0) / t);
  return 2.0;
}

double exact_2d(double x, double y, double t) { return 5.0 - 2.0 * exact_2b(std::max(x, y), t); }

}  // namespace

Wave classify_wave(const Flux& flux, double ul, double ur) {
  if (ul == ur) throw InvalidArgument("classify_wave: ul == ur is not a jump");
  const double s = (flux.value(ul) - flux.value(ur)) / (ul - ur);
  const double ll = flux.speed(ul);
  const double lr = flux.speed(ur);
  const bool left_ok = ll - s > kContactTol;
  const bool right_ok = s - lr > kContactTol;
  const bool left_eq = std::abs(ll - s) <= kContactTol;
  const bool right_eq = std::abs(s - lr) <= kContactTol;
  if (left_ok && right_ok) return {WaveKind::Shock, s};
  if ((left_ok || left_eq) && (right_ok || right_eq)) return {WaveKind::ContactDiscontinuity, s};
  return {WaveKind::Rarefaction, s};
}

double riemann_convex(const Flux& flux, double ul, double ur, double x0, double x, double t) {
  if (ul == ur) throw InvalidArgument("riemann_convex: ul == ur is not a Riemann problem");
  if (!(t > 0.0)) throw InvalidArgument("riemann_convex: t must be positive");
  const double a = std::min(ul, ur);
  const double b = std::max(ul, ur);
  constexpr int kSamples = 64;
  int sign = 0;
  double prev = flux.speed(a);
  for (int i = 1; i <= kSamples; ++i) {
    const double cur = flux.speed(a + (b - a) * i / kSamples);
    const int s = cur > prev ? 1 : (cur < prev ? -1 : 0);
    if (s == 0 || (sign != 0 && s != sign)) {
      throw InvalidArgument("riemann_convex: characteristic speed is not strictly monotone between states");
    }
    sign = s;
    prev = cur;
  }

  const double ll = flux.speed(ul);
  const double lr = flux.speed(ur);
  if (ll > lr) {
    const double s = (flux.value(ul) - flux.value(ur)) / (ul - ur);
    return x - x0 <= s * t ? ul : ur;
  }
  const double xi = (x - x0) / t;
  if (xi < ll) return ul;
  if (xi > lr) return ur;
  return bisect([&](double u) { return flux.speed(u) - xi; }, a, b, 1e-12);
}

double exact(const ProblemSpec& spec, std::span<const double> x, double t) {
  if (!spec.contains(x, t)) {
    std::ostringstream msg;
    msg << "point outside the domain of case " << spec.label() << ": x = " << x[0];
    if (x.size() > 1) msg << ", y = " << x[1];
    msg << ", t = " << t;
    throw InvalidArgument(msg.str());
  }
  if (t <= 0.0) return spec.initial(x);
  switch (spec.id) {
    case CaseId::k1A:
      return exact_1a(x[0], t);
    case CaseId::k1B:
      return exact_1b(x[0], t);
    case CaseId::k2A:
      return exact_2a(x[0], t);
    case CaseId::k2B:
      return exact_2b(x[0], t);
    case CaseId::k3A:
      return exact_3a(x[0], t);
    case CaseId::k3B:
      return exact_3b(x[0], t);
    case CaseId::k2D:
      return exact_2d(x[0], x[1], t);
  }
  throw InvalidArgument("unknown case");
}

double exact(CaseId id, std::span<const double> x, double t) { return exact(get_problem(id), x, t); }

double front_2d(double t) {
  if (t < 1.0) return t + 2.0;
  if (t < 4.0) return -2.0 - 3.0 * t + 8.0 * std::sqrt(t);
  return 6.0 - t;
}

std::vector<double> ExactShock::positions(double t) const {
  std::vector<double> xs;
  for (const auto& tr : tracks) {
    if (tr.active(t)) xs.push_back(tr.position(t));
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

double ExactShock::phi(double x, double y, double t) const {
  const double g = front_2d(t);
  return (x - g) * (y - g);
}

ExactShock exact_shocks(CaseId id) {
  ExactShock s{id, {}, {}};
  const double t_end = get_problem(id).t_end;
  switch (id) {
    case CaseId::k1A:
      s.tracks.push_back({1.0 / M_PI, t_end, [](double t) { return 1.0 + 0.5 * t; }});
      s.kinks = {1.0 / M_PI};
      break;
    case CaseId::k1B:
      s.tracks.push_back({0.0, t_end, [](double t) { return -std::sqrt(1.0 + 3.0 * t); }});
      s.tracks.push_back({0.0, t_end, [](double t) { return 3.0 * std::sqrt(1.0 + 3.0 * t); }});
      break;
    case CaseId::k2A:
      s.tracks.push_back({0.0, 0.5, [](double t) { return 12.0 * t - 5.0; }});
      s.tracks.push_back({0.0, 0.5, [](double t) { return -6.0 * t + 4.0; }});
      s.tracks.push_back({0.5, t_end, [](double t) { return 2.0 * t; }});
      s.kinks = {0.5};
      break;
    case CaseId::k2B:
    case CaseId::k2D:
      s.tracks.push_back({0.0, t_end, front_2d});
      s.kinks = {1.0, 4.0};
      break;
    case CaseId::k3A:
      s.tracks.push_back({0.0, t_end, [](double t) { return 1.0 + 0.5 * (std::sqrt(2.0) + 1.0) * t; }});
      break;
    case CaseId::k3B:
      s.tracks.push_back({0.0, t_end, [](double t) { return t; }});
      break;
  }
  return s;
}

}  // namespace clinn::oracle
