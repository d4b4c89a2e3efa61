#include <doctest.h>

#include <cmath>
#include <vector>

#include "clinn/oracle.hpp"
#include "clinn/shockgeom.hpp"

using namespace clinn;
using namespace clinn::shockgeom;

namespace {

std::vector<double> exact_on_grid(const ProblemSpec& spec, const CollocationSet& grid) {
  std::vector<double> u(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto p = grid.point(j);
    u[j] = oracle::exact(spec, p.first(spec.dim), p[spec.dim]);
  }
  return u;
}

std::vector<ShockCurve> fit_exact(const ProblemSpec& spec, const CollocationSet& grid) {
  const auto u = exact_on_grid(spec, grid);
  const auto slices = flag_slices(spec, grid, u);
  const auto pd = build_pd(grid, slices);
  const auto samples = group_slices(grid, pd);
  return fit_curves(samples, FitOptions{grid.spacing(), 3.0, 5.0, max_characteristic_speed(spec)});
}

}  // namespace

TEST_CASE("build_pd") {
  const auto spec = get_problem(CaseId::k2A);
  const auto grid = sample_grid(spec, 64, 16);
  SUBCASE("no flags") {
    const std::vector<double> u(grid.size(), 3.0);
    CHECK(build_pd(grid, flag_slices(spec, grid, u)).empty());
  }
  SUBCASE("one flagged cell per slice") {
    std::vector<indicator::FlagGrid> slices(16);
    for (auto& s : slices) {
      s.nx = 64;
      s.out.assign(64, 0.0);
      s.flag.assign(64, 0);
      s.flag[30] = 1;
    }
    const auto pd = build_pd(grid, slices);
    CHECK(pd.size() == 15);  // the t = 0 slice belongs to P_I
    for (std::size_t j : pd) CHECK(grid.kind[j] == PointKind::Interior);
  }
  SUBCASE("exact flags at t = 0.25 sit on the two shocks") {
    const auto g = sample_grid(spec, 512, 9);  // slice 1 is t = 0.25
    const auto pd = build_pd(g, flag_slices(spec, g, exact_on_grid(spec, g)));
    const double cell = g.spacing();
    int on_slice = 0;
    for (std::size_t j : pd) {
      const auto p = g.point(j);
      if (p[1] != 0.25) continue;
      ++on_slice;
      CHECK(std::min(std::abs(p[0] + 2.0), std::abs(p[0] - 2.5)) <= 1.5 * cell);
    }
    CHECK(on_slice >= 2);
  }
}

TEST_CASE("fit_curves on synthetic tracks") {
  SUBCASE("one straight track x = t + 2") {
    std::vector<SliceSamples> s;
    for (int k = 1; k <= 10; ++k) s.push_back({0.1 * k, {0.1 * k + 2.0}, {}});
    const auto curves = fit_curves(s, FitOptions{0.01, 3.0, 5.0, 2.0});
    REQUIRE(curves.size() == 1);
    for (double v : curves[0].s) CHECK(std::abs(v - 1.0) < 1e-9);
    CHECK(curves[0].position(0.55) == doctest::Approx(2.55));
  }
  SUBCASE("two parallel tracks stay apart") {
    std::vector<SliceSamples> s;
    for (int k = 1; k <= 10; ++k) s.push_back({0.1 * k, {0.1 * k, 0.1 * k + 3.0}, {}});
    const auto curves = fit_curves(s, FitOptions{0.01, 3.0, 5.0, 2.0});
    REQUIRE(curves.size() == 2);
    CHECK(curves[0].t.size() == 10);
    CHECK(curves[1].t.size() == 10);
  }
  SUBCASE("one slice gives a curve without speed") {
    const std::vector<SliceSamples> s = {{0.3, {1.0, 1.01}, {}}};
    const auto curves = fit_curves(s, FitOptions{0.01});
    REQUIRE(curves.size() == 1);
    CHECK_FALSE(curves[0].has_speed());
    CHECK(curves[0].x[0] == doctest::Approx(1.005));
    CHECK_THROWS_AS(curves[0].speed(0.3), InvalidArgument);
  }
  SUBCASE("clusters split on gaps larger than three cells") {
    const std::vector<SliceSamples> s = {{0.3, {1.0, 1.02, 1.04, 1.2}, {}}};
    CHECK(fit_curves(s, FitOptions{0.01}).size() == 2);
  }
  CHECK(fit_curves({}, FitOptions{0.01}).empty());
}

TEST_CASE("side samples") {
  ShockCurve c;
  c.t = {0.0, 1.0};
  c.x = {2.0, 2.0};
  c.s = {0.0, 0.0};
  const auto s = side_samples(c, 0.5, 0.05, -4.0, 6.0);
  CHECK(s.left[0] == doctest::Approx(1.95));
  CHECK(s.right[0] == doctest::Approx(2.05));
  CHECK(s.left[1] == 0.5);
  ShockCurve e;
  e.t = {0.0, 1.0};
  e.x = {0.01, 0.01};
  const auto clipped = side_samples(e, 0.5, 0.05, 0.0, 1.0);
  CHECK(clipped.left[0] == 0.0);
  CHECK(clipped.right[0] == doctest::Approx(0.06));
  ShockCurve edge;
  edge.t = {0.0, 1.0};
  edge.x = {-1.0, -1.0};
  CHECK_THROWS_AS(side_samples(edge, 0.5, 0.05, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(side_samples(c, 1.5, 0.05, -4.0, 6.0), InvalidArgument);
}

TEST_CASE("case 2A: fitted trajectories and speeds from exact data") {
  const auto spec = get_problem(CaseId::k2A);
  const auto grid = sample_grid(spec, 512, 64);
  const double dx = grid.spacing();
  const double dt = grid.times[1];
  const auto curves = fit_exact(spec, grid);
  const auto exact = oracle::exact_shocks(CaseId::k2A);
  std::size_t with_speed = 0;
  for (const auto& c : curves) {
    if (!c.has_speed()) continue;
    ++with_speed;
    for (std::size_t k = 0; k < c.t.size(); ++k) {
      const double t = c.t[k];
      double best = 1e300, slope = 0.0;
      for (const auto& tr : exact.tracks) {
        if (!tr.active(t)) continue;
        const double d = std::abs(tr.position(t) - c.x[k]);
        if (d < best) {
          best = d;
          slope = (tr.position(std::min(t + 1e-6, tr.t_end)) - tr.position(std::max(t - 1e-6, tr.t_begin))) /
                  (std::min(t + 1e-6, tr.t_end) - std::max(t - 1e-6, tr.t_begin));
        }
      }
      INFO("t=" << t << " x=" << c.x[k]);
      CHECK(best < 2.0 * dx);
      if (std::abs(t - 0.5) > 2.5 * dt) CHECK(std::abs(c.s[k] - slope) < 0.5);
    }
  }
  CHECK(with_speed >= 2);
}

TEST_CASE("case 1A: fitted shock follows x = t/2 + 1 late in time") {
  const auto spec = get_problem(CaseId::k1A);
  const auto grid = sample_grid(spec, 512, 64);
  const auto curves = fit_exact(spec, grid);
  bool seen = false;
  for (const auto& c : curves) {
    for (std::size_t k = 0; k < c.t.size(); ++k) {
      if (c.t[k] < 0.35) continue;
      seen = true;
      CHECK(std::abs(c.x[k] - (0.5 * c.t[k] + 1.0)) < 2.0 * grid.spacing());
    }
  }
  CHECK(seen);
}

TEST_CASE("1D jump-condition targets") {
  const auto spec = get_problem(CaseId::k2A);
  const auto grid = sample_grid(spec, 256, 32);
  const auto u = exact_on_grid(spec, grid);
  const auto slices = flag_slices(spec, grid, u);
  const auto pd = build_pd(grid, slices);
  const auto curves = fit_curves(group_slices(grid, pd), FitOptions{grid.spacing(), 3.0, 5.0, 20.0});
  const double h = 2.0 * grid.spacing();
  const auto targets = rh_targets_1d(spec, grid, pd, curves, h);
  CHECK(!targets.empty());
  const auto& f = spec.flux[0];
  for (const auto& r : targets) {
    CHECK(r.right[0] - r.left[0] <= 2.0 * h + 1e-12);
    const double t = r.left[1];
    if (std::abs(t - 0.5) < 0.2) continue;
    const double ul = oracle::exact(spec, std::vector<double>{r.left[0]}, t);
    const double ur = oracle::exact(spec, std::vector<double>{r.right[0]}, t);
    if (ul == ur) continue;
    CHECK(std::abs((f.value(ul) - f.value(ur)) / (ul - ur) - r.s) < 0.5);
  }
}

TEST_CASE("2D front normal and speed") {
  const std::size_t n = 128;
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = ys[i] = 4.0 * i / (n - 1);
  const auto mx = indicator::Mesh1D::centered(xs), my = indicator::Mesh1D::centered(ys);
  const std::vector<Flux> burgers(2);
  auto front = [&](double pos) {
    std::vector<double> u(n * n);
    for (std::size_t iy = 0; iy < n; ++iy)
      for (std::size_t ix = 0; ix < n; ++ix) u[iy * n + ix] = xs[ix] < pos ? 2.0 : 0.0;
    return indicator::detect_2d(mx, my, u, burgers);
  };

  SUBCASE("planar front moving at speed 1") {
    const auto a = front(2.0), b = front(2.5);
    const auto est = rh_target_2d(a, b, xs, ys, 0.5, 1.0);
    REQUIRE(!est.empty());
    for (const auto& e : est) {
      CHECK(std::abs(e.normal[0] - 1.0) < 1e-12);
      CHECK(std::abs(e.normal[1]) < 1e-12);
      CHECK(std::abs(e.s - 1.0) < 0.1);
    }
  }
  SUBCASE("stationary front") {
    const auto a = front(2.0);
    for (const auto& e : rh_target_2d(a, a, xs, ys, 0.1, 0.5)) CHECK(std::abs(e.s) < 1e-12);
  }
  SUBCASE("isolated flagged cell is skipped") {
    indicator::FlagGrid g;
    g.nx = g.ny = n;
    g.out.assign(n * n, 0.0);
    g.flag.assign(n * n, 0);
    g.flag[40 * n + 40] = 1;
    CHECK(rh_target_2d(g, g, xs, ys, 0.1, 0.5).empty());
  }
}

TEST_CASE("2D targets on the exact 2D solution") {
  const auto spec = get_problem(CaseId::k2D);
  const auto grid = sample_grid(spec, 64, 8);
  const auto u = exact_on_grid(spec, grid);
  const auto slices = flag_slices(spec, grid, u);
  const auto pd = build_pd(grid, slices);
  CHECK(!pd.empty());
  const auto targets = rh_targets_2d(spec, grid, slices, pd, 2.0 * grid.spacing(), max_characteristic_speed(spec));
  CHECK(!targets.empty());
  for (const auto& r : targets) {
    CHECK(std::abs(std::hypot(r.normal[0], r.normal[1]) - 1.0) < 1e-12);
    CHECK(r.left.size() == 3);
  }
}

TEST_CASE("max characteristic speed") {
  CHECK(max_characteristic_speed(get_problem(CaseId::k2A)) == doctest::Approx(20.0));
  CHECK(max_characteristic_speed(get_problem(CaseId::k1B)) == doctest::Approx(9.0));
}
