#include "clinn/diff/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace clinn::diff {

Var Tape::variable(double value) {
  nodes_.push_back({kNoParent, kNoParent, 0.0, 0.0});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1), value);
}

Var Tape::record(double value, const Var& a, double da) {
  nodes_.push_back({a.index(), kNoParent, da, 0.0});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1), value);
}

Var Tape::record(double value, const Var& a, double da, const Var& b, double db) {
  if (a.is_constant()) return record(value, b, db);
  if (b.is_constant()) return record(value, a, da);
  nodes_.push_back({a.index(), b.index(), da, db});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1), value);
}

std::vector<double> Tape::adjoints(std::span<const std::pair<Var, double>> seeds) const {
  std::vector<double> adj(nodes_.size(), 0.0);
  for (const auto& [v, s] : seeds) {
    if (v.is_constant()) continue;
    if (v.tape() != this) throw InvalidArgument("seed belongs to a different tape");
    adj[v.index()] += s;
  }
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    const double g = adj[i];
    if (g == 0.0) continue;
    const Node& n = nodes_[i];
    if (n.a != kNoParent) adj[n.a] += g * n.da;
    if (n.b != kNoParent) adj[n.b] += g * n.db;
  }
  return adj;
}

std::vector<double> Tape::adjoints(const Var& output) const {
  const std::pair<Var, double> seed{output, 1.0};
  return adjoints(std::span(&seed, 1));
}

namespace {

Tape* tape_of(const Var& a, const Var& b) {
  if (!a.is_constant() && !b.is_constant() && a.tape() != b.tape()) {
    throw InvalidArgument("mixing Vars from different tapes");
  }
  return a.is_constant() ? b.tape() : a.tape();
}

}  // namespace

Var operator+(const Var& a, const Var& b) {
  Tape* t = tape_of(a, b);
  const double v = a.value() + b.value();
  return t ? t->record(v, a, 1.0, b, 1.0) : Var(v);
}

Var operator-(const Var& a, const Var& b) {
  Tape* t = tape_of(a, b);
  const double v = a.value() - b.value();
  return t ? t->record(v, a, 1.0, b, -1.0) : Var(v);
}

Var operator*(const Var& a, const Var& b) {
  Tape* t = tape_of(a, b);
  const double v = a.value() * b.value();
  return t ? t->record(v, a, b.value(), b, a.value()) : Var(v);
}

Var operator/(const Var& a, const Var& b) {
  Tape* t = tape_of(a, b);
  const double v = checked_div(a.value(), b.value());
  return t ? t->record(v, a, 1.0 / b.value(), b, -v / b.value()) : Var(v);
}

Var operator-(const Var& a) {
  return a.is_constant() ? Var(-a.value()) : a.tape()->record(-a.value(), a, -1.0);
}

namespace {

template <class F, class D>
Var unary(const Var& x, F f, D df) {
  const double v = f(x.value());
  if (x.is_constant()) return Var(v);
  return x.tape()->record(v, x, df(x.value(), v));
}

}  // namespace

Var tanh(const Var& x) {
  return unary(x, [](double a) { return std::tanh(a); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& x) {
  return unary(x, [](double a) { return sigmoid(a); }, [](double, double y) { return y * (1.0 - y); });
}

Var sin(const Var& x) {
  return unary(x, [](double a) { return std::sin(a); }, [](double a, double) { return std::cos(a); });
}

// Subgradient 0 at the kink.
Var abs(const Var& x) {
  return unary(
      x, [](double a) { return std::abs(a); },
      [](double a, double) { return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0); });
}

Var square(const Var& x) {
  return unary(x, [](double a) { return a * a; }, [](double a, double) { return 2.0 * a; });
}

Var checked_sqrt(const Var& x) {
  return unary(x, [](double a) { return checked_sqrt(a); }, [](double, double y) { return 0.5 / y; });
}

Var hard_tanh(const Var& x, double lo, double hi) {
  return unary(
      x, [lo, hi](double a) { return hard_tanh(a, lo, hi); },
      [lo, hi](double a, double) { return (a < lo || a > hi) ? 0.0 : 1.0; });
}

Var apply(std::string_view primitive, const Var& x) {
  if (primitive == "tanh") return tanh(x);
  if (primitive == "sigmoid") return sigmoid(x);
  if (primitive == "sin") return sin(x);
  if (primitive == "abs") return abs(x);
  if (primitive == "square") return square(x);
  if (primitive == "sqrt") return checked_sqrt(x);
  throw UnsupportedPrimitive(std::string(primitive));
}

ValueAndGradient loss_gradient(const VarFunction& loss, std::span<const double> params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (double p : params) vars.push_back(tape.variable(p));
  const Var out = loss(vars);

  ValueAndGradient r;
  r.value = out.value();
  r.gradient.assign(params.size(), 0.0);
  if (out.is_constant()) return r;
  const auto adj = tape.adjoints(out);
  // Parameters occupy the first slots of the tape.
  for (std::size_t i = 0; i < params.size(); ++i) r.gradient[i] = adj[vars[i].index()];
  return r;
}

double finite_diff_check(const VarFunction& f, std::span<const double> point, double step) {
  if (!(step > 0.0)) throw InvalidArgument("finite_diff_check: step must be positive");
  const auto analytic = loss_gradient(f, point);
  auto eval = [&](std::span<const double> at) {
    std::vector<Var> c(at.begin(), at.end());
    return f(c).value();
  };
  std::vector<double> probe(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double up = eval(probe);
    probe[i] = orig - step;
    const double down = eval(probe);
    probe[i] = orig;
    const double central = (up - down) / (2.0 * step);
    const double a = analytic.gradient[i];
    worst = std::max(worst, std::abs(a - central) / std::max(1.0, std::abs(a)));
  }
  return worst;
}

}  // namespace clinn::diff
