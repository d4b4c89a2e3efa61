#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "clinn/loss.hpp"

using namespace clinn;
using namespace clinn::loss;

namespace {

NetworkParams constant_net(std::size_t input_dim, double c) {
  NetworkParams p(Architecture{4, 1, input_dim});
  p.bias(p.projection(), 0) = c;
  return p;
}

NetworkParams random_net(std::size_t input_dim, std::uint64_t seed) {
  NetworkParams p = init_params(Architecture{8, 2, input_dim}, seed);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> uni(-0.3, 0.3);
  for (double& v : p.values()) v += uni(rng);
  return p;
}

// Marks a few interior points as P_D and builds side targets around them.
std::vector<shockgeom::RhTarget> synthetic_targets(const ProblemSpec& spec, CollocationSet& grid, std::size_t every) {
  std::vector<shockgeom::RhTarget> out;
  grid.discontinuity.clear();
  for (std::size_t k = 0; k < grid.interior.size(); k += every) {
    const std::size_t j = grid.interior[k];
    grid.discontinuity.push_back(j);
    const auto p = grid.point(j);
    shockgeom::RhTarget r;
    r.point = j;
    r.left.assign(p.begin(), p.end());
    r.right.assign(p.begin(), p.end());
    for (std::size_t a = 0; a < spec.dim; ++a) {
      const double n = spec.dim == 1 ? 1.0 : (a == 0 ? 0.6 : 0.8);
      r.normal.push_back(n);
      r.left[a] -= 0.4 * n;
      r.right[a] += 0.4 * n;
    }
    r.s = 0.5 + 0.1 * static_cast<double>(k % 7);
    out.push_back(std::move(r));
  }
  return out;
}

void randomize_weights(CollocationSet& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(1.0, 3.0);
  for (double& w : grid.rar_weights) w = uni(rng);
}

double fd_rel_error(const LossAssembler& a, NetworkParams p, std::span<const double> grad) {
  double worst = 0.0;
  const double h = 1e-6;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p.values()[i];
    p.values()[i] = keep + h;
    const double fp = a.evaluate(p).total;
    p.values()[i] = keep - h;
    const double fm = a.evaluate(p).total;
    p.values()[i] = keep;
    const double fd = (fp - fm) / (2.0 * h);
    worst = std::max(worst, std::abs(grad[i] - fd) / std::max(1.0, std::abs(grad[i])));
  }
  return worst;
}

}  // namespace

TEST_CASE("method presets enable the expected term sets") {
  CHECK(preset_terms(Method::Clinn) == TermSet{true, true, true, true, true, true});
  CHECK(preset_terms(Method::Ifnn) == TermSet{true, true, true, true, false, false});
  CHECK(preset_terms(Method::PinnWe) == TermSet{true, true, true, false, false, true});
  CHECK(preset_terms(Method::Pinn) == TermSet{true, true, true, false, false, false});
  for (Method m : {Method::Clinn, Method::Ifnn, Method::PinnWe, Method::Pinn}) {
    CHECK(parse_method(method_label(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("wpinn"), InvalidArgument);
  const LossWeights w;
  CHECK(w.gov == 1.0);
  CHECK(w.ic == 1000.0);
  CHECK(w.bc == 10.0);
  CHECK(w.im == 10000.0);
  CHECK(w.bd == 10000.0);
  CHECK(w.rh == 100.0);
}

TEST_CASE("point formulas") {
  SUBCASE("governing residual of u = x - t under Burgers at u = 1") {
    const auto spec = get_problem(CaseId::k1B);
    const std::vector<double> du = {1.0, -1.0};
    CHECK(pde_residual<double>(spec, 1.0, du) == 0.0);
    CHECK(pde_residual<double>(spec, 2.0, du) == 1.0);
  }
  SUBCASE("implicit residual") {
    const auto spec = get_problem(CaseId::k1B);
    const std::vector<double> p = {1.0, 1.0};
    CHECK(std::abs(implicit_residual<double>(spec, p, 0.75)) < 1e-15);
    CHECK(implicit_residual<double>(spec, p, 0.75 + 0.01) == doctest::Approx(0.01 - 3.0 * (-0.01)));
    const std::vector<double> t0 = {2.0, 0.0};
    CHECK(implicit_residual<double>(spec, t0, 5.0) == doctest::Approx(5.0 - 6.0));
    // Far-field extension: the shifted argument leaves the domain.
    const std::vector<double> far = {-3.9, 1.0};
    CHECK(implicit_residual<double>(spec, far, 1.0) == 1.0);
  }
  SUBCASE("boundedness") {
    const auto spec = get_problem(CaseId::k2A);  // [1, 19]
    CHECK(exceedance<double>(spec, 10.0) == 0.0);
    CHECK(exceedance<double>(spec, 1.0) == 0.0);
    CHECK(std::pow(exceedance<double>(spec, 19.2), 2) == doctest::Approx(0.04));
    CHECK(std::pow(exceedance<double>(spec, 0.7), 2) == doctest::Approx(0.09));
  }
  SUBCASE("jump mismatch") {
    const std::vector<double> n1 = {1.0};
    CHECK(jump_mismatch<double>(get_problem(CaseId::k1B), n1, 1.0, 2.0, 0.0) == 0.0);
    CHECK(std::abs(jump_mismatch<double>(get_problem(CaseId::k2A), n1, 12.0, 1.0, 9.0)) < 1e-12);
    const std::vector<double> n2 = {0.6, 0.8};
    // Burgers in both directions: (n_x + n_y) * (ul + ur) / 2 - s.
    CHECK(jump_mismatch<double>(get_problem(CaseId::k2D), n2, 0.0, 3.0, 1.0) == doctest::Approx(2.8));
  }
}

TEST_CASE("data terms and normalisation") {
  SUBCASE("constant offset on the initial line") {
    auto spec = get_problem(CaseId::k2A);
    spec.u0 = InitialData{InitialData::Kind::Piecewise, {0.0}, {2.0, 2.0}};
    const auto grid = sample_grid(spec, 32, 4);
    LossWeights w;
    w.terms = {false, true, false, false, false, false};
    const LossAssembler a(spec, grid, {}, w);
    CHECK(a.evaluate(constant_net(2, 2.0)).ic == doctest::Approx(0.0));
    CHECK(a.evaluate(constant_net(2, 2.3)).ic == doctest::Approx(0.09));
    CHECK(a.evaluate(constant_net(2, 2.3)).total == doctest::Approx(90.0));
  }
  SUBCASE("one wrong initial point out of 512") {
    auto spec = get_problem(CaseId::k2A);
    const auto grid = sample_grid(spec, 512, 4);
    const double x = grid.axes[0][100];
    spec.u0 = InitialData{InitialData::Kind::Piecewise, {x - 1e-9, x}, {0.0, 0.1, 0.0}};
    LossWeights w;
    w.terms = {false, true, false, false, false, false};
    const LossAssembler a(spec, grid, {}, w);
    CHECK(a.evaluate(constant_net(2, 0.0)).ic == doctest::Approx(0.01 / 512.0).epsilon(1e-12));
  }
  SUBCASE("boundary term is an unnormalised sum") {
    auto spec = get_problem(CaseId::k2A);
    const auto grid = sample_grid(spec, 16, 5);  // 2 * 4 boundary points, u_B = 1 left, 19 right
    LossWeights w;
    w.terms = {false, false, true, false, false, false};
    const LossAssembler a(spec, grid, {}, w);
    CHECK(a.evaluate(constant_net(2, 1.0)).bc == doctest::Approx(4.0 * 18.0 * 18.0));
  }
  SUBCASE("boundedness over the interior") {
    const auto spec = get_problem(CaseId::k2A);
    const auto grid = sample_grid(spec, 16, 5);
    LossWeights w;
    w.terms = {false, false, false, false, true, false};
    const LossAssembler a(spec, grid, {}, w);
    CHECK(a.evaluate(constant_net(2, 19.2)).bd == doctest::Approx(0.04));
    CHECK(a.evaluate(constant_net(2, 0.7)).bd == doctest::Approx(0.09));
    CHECK(a.evaluate(constant_net(2, 5.0)).bd == 0.0);
  }
  SUBCASE("constant network has zero governing residual") {
    const auto spec = get_problem(CaseId::k3A);
    const auto grid = sample_grid(spec, 16, 5);
    const LossAssembler a(spec, grid, {}, preset_weights(Method::Pinn));
    const auto b = a.evaluate(constant_net(2, 0.4));
    CHECK(b.gov == 0.0);
    for (double v : b.gov_point) CHECK(v == 0.0);
  }
}

TEST_CASE("discontinuity points leave the residual terms but keep the normaliser") {
  const auto spec = get_problem(CaseId::k1B);
  auto grid = sample_grid(spec, 24, 6);
  const auto net = random_net(2, 5);
  LossWeights w;
  w.terms = {true, false, false, true, false, false};
  const auto full = LossAssembler(spec, grid, {}, w).evaluate(net);
  grid.discontinuity = {grid.interior[3], grid.interior[10]};
  const LossAssembler a(spec, grid, {}, w);
  CHECK(a.residual_points().size() == grid.interior.size() - 2);
  const auto cut = a.evaluate(net);
  for (std::size_t j : grid.discontinuity) {
    CHECK(cut.gov_point[j] == 0.0);
    CHECK(cut.im_point[j] == 0.0);
  }
  const double removed = full.gov_point[grid.interior[3]] + full.gov_point[grid.interior[10]];
  CHECK(cut.gov == doctest::Approx(full.gov - removed).epsilon(1e-12));
  CHECK(cut.gov_point[grid.interior[4]] == full.gov_point[grid.interior[4]]);
}

TEST_CASE("jump term") {
  const auto spec = get_problem(CaseId::k2A);
  auto grid = sample_grid(spec, 16, 5);
  const auto targets = synthetic_targets(spec, grid, 5);
  LossWeights w;
  w.terms = {false, false, false, false, false, true};
  SUBCASE("flat prediction skips every target") {
    const auto b = LossAssembler(spec, grid, targets, w).evaluate(constant_net(2, 3.0));
    CHECK(b.rh == 0.0);
    CHECK(b.rh_used == 0);
    CHECK(b.rh_skipped == targets.size());
    CHECK(b.rh_all_skipped());
  }
  SUBCASE("mean of absolute mismatches") {
    const auto net = random_net(2, 9);
    const auto b = LossAssembler(spec, grid, targets, w).evaluate(net);
    REQUIRE(b.rh_used == targets.size());
    double sum = 0.0;
    for (const auto& t : targets) {
      const double ul = forward(net, t.left), ur = forward(net, t.right);
      sum += std::abs(jump_mismatch<double>(spec, t.normal, t.s, ul, ur));
    }
    CHECK(b.rh == doctest::Approx(sum / static_cast<double>(targets.size())).epsilon(1e-12));
  }
}

TEST_CASE("assembly: toggles, linearity and the pinn row") {
  const auto spec = get_problem(CaseId::k2A);
  auto grid = sample_grid(spec, 20, 6);
  const auto targets = synthetic_targets(spec, grid, 7);
  const auto net = random_net(2, 21);
  const auto all = LossAssembler(spec, grid, targets, preset_weights(Method::Clinn)).evaluate(net);
  CHECK(all.gov > 0.0);
  CHECK(all.im > 0.0);
  CHECK(all.bd > 0.0);
  CHECK(all.rh > 0.0);

  LossWeights only_gov;
  only_gov.terms = {true, false, false, false, false, false};
  const auto g = LossAssembler(spec, grid, targets, only_gov).evaluate(net);
  CHECK(g.total == only_gov.gov * g.gov);

  const auto pinn = LossAssembler(spec, grid, targets, preset_weights(Method::Pinn)).evaluate(net);
  CHECK(pinn.im == 0.0);
  CHECK(pinn.bd == 0.0);
  CHECK(pinn.rh == 0.0);
  const LossWeights d;
  CHECK(pinn.total == d.gov * all.gov + d.ic * all.ic + d.bc * all.bc);

  auto doubled = grid;
  for (double& w : doubled.rar_weights) w *= 2.0;
  const auto two = LossAssembler(spec, doubled, targets, preset_weights(Method::Clinn)).evaluate(net);
  CHECK(two.gov == doctest::Approx(2.0 * all.gov).epsilon(1e-14));
  CHECK(two.im == doctest::Approx(2.0 * all.im).epsilon(1e-14));
  CHECK(two.bd == doctest::Approx(2.0 * all.bd).epsilon(1e-14));
  CHECK(two.ic == doctest::Approx(2.0 * all.ic).epsilon(1e-14));
  CHECK(two.bc == doctest::Approx(2.0 * all.bc).epsilon(1e-14));
  CHECK(two.rh == doctest::Approx(2.0 * all.rh).epsilon(1e-14));
  CHECK(two.gov_point == all.gov_point);  // per-point values carry no w_j

  LossWeights heavy = preset_weights(Method::Clinn);
  heavy.gov *= 3.0;
  heavy.rh *= 3.0;
  const auto h = LossAssembler(spec, grid, targets, heavy).evaluate(net);
  CHECK(h.total - all.total == doctest::Approx(2.0 * (all.gov + 100.0 * all.rh)).epsilon(1e-10));

  for (double v : {all.gov, all.ic, all.bc, all.im, all.bd, all.rh}) CHECK(v >= 0.0);
}

TEST_CASE("gradient of the full loss against the tape reference and finite differences") {
  for (CaseId id : {CaseId::k2A, CaseId::k1A, CaseId::k2D}) {
    const auto spec = get_problem(id);
    CAPTURE(spec.label());
    auto grid = sample_grid(spec, spec.dim == 1 ? 12 : 6, 4);
    randomize_weights(grid, 3);
    const auto targets = synthetic_targets(spec, grid, 3);
    const auto net = random_net(spec.input_dim(), 40 + static_cast<std::uint64_t>(id));
    const auto weights = preset_weights(Method::Clinn);
    const LossAssembler a(spec, grid, targets, weights);
    std::vector<double> grad(net.size());
    const auto b = a.evaluate(net, grad);
    CHECK(b.rh_used > 0);
    const auto ref = reference::value_and_gradient(spec, grid, targets, weights, net);
    CHECK(b.total == doctest::Approx(ref.value).epsilon(1e-12));
    double worst = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      worst = std::max(worst, std::abs(grad[i] - ref.gradient[i]) / std::max(1.0, std::abs(ref.gradient[i])));
    }
    CHECK(worst < 1e-10);
    // Unit term weights keep the total O(1) so a 1e-6 step is not swamped by roundoff.
    LossWeights unit;
    unit.gov = unit.ic = unit.bc = unit.im = unit.bd = unit.rh = 1.0;
    const LossAssembler u(spec, grid, targets, unit);
    std::vector<double> ugrad(net.size());
    u.evaluate(net, ugrad);
    CHECK(fd_rel_error(u, net, ugrad) < 1e-5);
    CHECK(a.evaluate(net).total == b.total);
  }
}

TEST_CASE("disabled terms contribute no gradient") {
  const auto spec = get_problem(CaseId::k2A);
  auto grid = sample_grid(spec, 12, 4);
  const auto targets = synthetic_targets(spec, grid, 3);
  const auto net = random_net(2, 77);
  for (TermSet terms : {TermSet{true, false, true, true, false, false}, TermSet{false, true, false, false, true, true},
                        preset_terms(Method::PinnWe)}) {
    LossWeights w;
    w.terms = terms;
    std::vector<double> grad(net.size());
    LossAssembler(spec, grid, targets, w).evaluate(net, grad);
    const auto ref = reference::value_and_gradient(spec, grid, targets, w, net);
    for (std::size_t i = 0; i < grad.size(); ++i) {
      CHECK(std::abs(grad[i] - ref.gradient[i]) <= 1e-10 * std::max(1.0, std::abs(ref.gradient[i])));
    }
  }
}

TEST_CASE("errors") {
  const auto spec = get_problem(CaseId::k1B);
  const auto grid = sample_grid(spec, 8, 3);
  const LossAssembler a(spec, grid, {}, LossWeights{});
  std::vector<double> short_grad(3);
  CHECK_THROWS_AS(a.evaluate(constant_net(2, 0.0), short_grad), ShapeMismatch);
  CHECK_THROWS_AS(a.evaluate(constant_net(3, 0.0)), ShapeMismatch);
  shockgeom::RhTarget bad;
  bad.left = {0.0};
  bad.right = {1.0, 0.5};
  bad.normal = {1.0};
  CHECK_THROWS_AS(LossAssembler(spec, grid, {bad}, LossWeights{}), ShapeMismatch);
}
