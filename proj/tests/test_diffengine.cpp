#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "clinn/diff/dual.hpp"
#include "clinn/diff/tape.hpp"
#include "clinn/network.hpp"

using namespace clinn;
using namespace clinn::diff;

namespace {

NetworkParams hand_net(std::size_t width, std::size_t depth) {
  return NetworkParams(Architecture{width, depth, 2});
}

double central(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("dual arithmetic follows the product and chain rules") {
  const auto a = Dual<double>::variable(3.0, 2, 0);
  const auto b = Dual<double>::variable(5.0, 2, 1);
  const auto p = a * b;
  CHECK(p.value() == 15.0);
  CHECK(p.tangent(0) == 5.0);
  CHECK(p.tangent(1) == 3.0);
  CHECK(p.size() == 2);

  const auto q = a / b;
  CHECK(q.tangent(0) == doctest::Approx(1.0 / 5.0));
  CHECK(q.tangent(1) == doctest::Approx(-3.0 / 25.0));

  const auto t = tanh(a);
  CHECK(t.tangent(0) == doctest::Approx(1.0 - std::tanh(3.0) * std::tanh(3.0)));
  CHECK(t.tangent(1) == 0.0);

  const auto s = sin(b);
  CHECK(s.tangent(1) == doctest::Approx(std::cos(5.0)));

  // Scalars adopt the size of the dual they meet.
  const auto c = Dual<double>(2.0) + a;
  CHECK(c.size() == 2);
}

TEST_CASE("dual tangent sizes must agree") {
  const auto a = Dual<double>::variable(1.0, 2, 0);
  const auto b = Dual<double>::variable(1.0, 3, 0);
  CHECK_THROWS_AS(a + b, InvalidArgument);
  CHECK_THROWS_AS(Dual<double>(1.0, 5), InvalidArgument);
}

TEST_CASE("guarded division and square root") {
  CHECK_THROWS_AS(checked_div(1.0, 1e-13), NumericalError);
  CHECK(checked_div(1.0, 2.0) == 0.5);
  Tape tape;
  const Var x = tape.variable(0.0);
  CHECK_THROWS_AS(Var(1.0) / x, NumericalError);
  CHECK_THROWS_AS(checked_sqrt(tape.variable(-1.0)), NumericalError);
  CHECK_THROWS_AS(checked_sqrt(tape.variable(0.0)), NumericalError);
}

TEST_CASE("loss = sum of squares has gradient 2 theta") {
  const std::vector<double> theta = {0.5, -1.25, 3.0, 0.0};
  const auto r = loss_gradient(
      [](std::span<const Var> v) {
        Var s(0.0);
        for (const Var& x : v) s += square(x);
        return s;
      },
      theta);
  REQUIRE(r.gradient.size() == theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) CHECK(r.gradient[i] == 2.0 * theta[i]);
  CHECK(r.value == doctest::Approx(0.25 + 1.5625 + 9.0));
}

TEST_CASE("unsupported primitives are named") {
  Tape tape;
  const Var x = tape.variable(0.3);
  CHECK(apply("tanh", x).value() == doctest::Approx(std::tanh(0.3)));
  try {
    apply("erf", x);
    FAIL("expected UnsupportedPrimitive");
  } catch (const UnsupportedPrimitive& e) {
    CHECK(e.name() == "erf");
  }
}

TEST_CASE("abs and hard_tanh subgradients") {
  const auto r = loss_gradient([](std::span<const Var> v) { return abs(v[0]) + hard_tanh(v[1], -1.0, 1.0); },
                               std::vector<double>{0.0, 2.0});
  CHECK(r.gradient[0] == 0.0);
  CHECK(r.gradient[1] == 0.0);
  const auto r2 = loss_gradient([](std::span<const Var> v) { return abs(v[0]) + hard_tanh(v[1], -1.0, 1.0); },
                                std::vector<double>{-2.0, 0.5});
  CHECK(r2.gradient[0] == -1.0);
  CHECK(r2.gradient[1] == 1.0);
}

TEST_CASE("finite_diff_check examples") {
  const std::vector<double> p = {1.0, 2.0};
  const double dot = finite_diff_check([](std::span<const Var> v) { return v[0] * v[0] + v[1] * v[1]; }, p, 1e-6);
  CHECK(dot < 1e-9);
  const double flat = finite_diff_check([](std::span<const Var>) { return Var(4.0); }, p, 1e-6);
  CHECK(flat <= 1e-12);
  CHECK_THROWS_AS(finite_diff_check([](std::span<const Var> v) { return v[0]; }, p, 0.0), InvalidArgument);
}

TEST_CASE("randomized composites agree with central differences") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(4);
    for (double& x : p) x = uni(rng);
    p[3] = 1.0 + std::abs(p[3]);  // keep sqrt / division away from the guard
    const double err = finite_diff_check(
        [](std::span<const Var> v) {
          const Var a = tanh(v[0] * v[1] + v[2]);
          const Var b = sigmoid(v[1] - v[0]) * sin(v[2]);
          const Var c = checked_sqrt(v[3]) / (square(v[0]) + 1.0);
          return a * b + c + hard_tanh(v[0] * 0.3, -2.0, 2.0);
        },
        p, 1e-6);
    CHECK(err < 1e-5);
  }
}

TEST_CASE("input gradients of hand-built networks") {
  SUBCASE("u = x + 2t through the lift alone") {
    NetworkParams net = hand_net(1, 0);
    net.weight(net.lift(), 0, 0) = 1.0;
    net.weight(net.lift(), 0, 1) = 2.0;
    net.weight(net.projection(), 0, 0) = 1.0;
    const std::vector<double> pt = {0.4, -0.3};
    const auto g = eval_with_input_grads(net, pt);
    CHECK(g.u == doctest::Approx(0.4 - 0.6));
    CHECK(g.du_dx[0] == 1.0);
    CHECK(g.du_dt == 2.0);
  }
  SUBCASE("u = tanh(x) at x = 0") {
    NetworkParams net = hand_net(2, 1);
    net.weight(net.lift(), 0, 0) = 1.0;           // v0 = (x, 0)
    net.weight(net.block(0), 1, 0) = 1.0;         // v1[1] = tanh(x)
    net.weight(net.projection(), 0, 1) = 1.0;
    const std::vector<double> pt = {0.0, 0.77};
    const auto g = eval_with_input_grads(net, pt);
    CHECK(g.u == 0.0);
    CHECK(g.du_dx[0] == 1.0);
    CHECK(g.du_dt == 0.0);
  }
}

TEST_CASE("input gradients match finite differences of the forward pass") {
  const auto net = init_params(Architecture{8, 2, 2}, 99);
  const std::vector<double> pt = {0.3, 0.7};
  const auto g = eval_with_input_grads(net, pt);
  const double fx = central([&](double x) { return forward(net, std::vector<double>{x, 0.7}); }, 0.3, 1e-6);
  const double ft = central([&](double t) { return forward(net, std::vector<double>{0.3, t}); }, 0.7, 1e-6);
  CHECK(std::abs(g.du_dx[0] - fx) / std::max(1.0, std::abs(fx)) < 1e-5);
  CHECK(std::abs(g.du_dt - ft) / std::max(1.0, std::abs(ft)) < 1e-5);
  CHECK(g.u == doctest::Approx(forward(net, pt)).epsilon(1e-14));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = init_params(Architecture{8, 2, 3}, 1000 + trial);
    const std::vector<double> q = {uni(rng), uni(rng), uni(rng)};
    const auto gq = eval_with_input_grads(n, q);
    for (std::size_t c = 0; c < 3; ++c) {
      const double fd = central(
          [&](double v) {
            auto r = q;
            r[c] = v;
            return forward(n, r);
          },
          q[c], 1e-6);
      const double an = c < 2 ? gq.du_dx[c] : gq.du_dt;
      CHECK(std::abs(an - fd) / std::max(1.0, std::abs(an)) < 1e-5);
    }
  }
}

TEST_CASE("network forward on the tape matches finite differences in the parameters") {
  const auto net = init_params(Architecture{8, 2, 2}, 3);
  const std::vector<double> pt = {0.2, 0.4};
  const double err = finite_diff_check(
      [&](std::span<const Var> theta) {
        std::vector<Var> in = {Var(pt[0]), Var(pt[1])};
        return forward_generic<Var, Var>(net.arch(), theta, std::span<const Var>(in));
      },
      net.values(), 1e-6);
  CHECK(err < 1e-5);
}

TEST_CASE("zeroed residual branch gets exactly zero gradient") {
  // Projection weights zero on every unit: blocks cannot reach the output.
  auto net = init_params(Architecture{8, 2, 2}, 4);
  const auto proj = net.projection();
  for (std::size_t j = 0; j < proj.cols; ++j) net.weight(proj, 0, j) = 0.0;
  const std::vector<double> pt = {0.5, 0.5};
  const auto r = loss_gradient(
      [&](std::span<const Var> theta) {
        std::vector<Var> in = {Var(pt[0]), Var(pt[1])};
        return square(forward_generic<Var, Var>(net.arch(), theta, std::span<const Var>(in)) - 1.0);
      },
      net.values());
  const auto b0 = net.block(0);
  for (std::size_t i = 0; i < b0.rows * b0.cols; ++i) CHECK(r.gradient[b0.weight_offset + i] == 0.0);
}

TEST_CASE("evaluation is deterministic") {
  const auto net = init_params(Architecture{16, 3, 2}, 8);
  const std::vector<double> pt = {0.123, 0.456};
  const auto a = eval_with_input_grads(net, pt);
  const auto b = eval_with_input_grads(net, pt);
  CHECK(a.u == b.u);
  CHECK(a.du_dx[0] == b.du_dx[0]);
  CHECK(a.du_dt == b.du_dt);
}
