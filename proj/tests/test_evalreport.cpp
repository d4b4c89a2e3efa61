#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "clinn/evalreport.hpp"

using namespace clinn;
using namespace clinn::evalreport;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("clinn_evalreport_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("mse: identical, offset, single outlier") {
  std::vector<double> a(1000);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::sin(0.01 * static_cast<double>(i));
  CHECK(mse(a, a) == 0.0);

  std::vector<double> b = a;
  for (double& v : b) v += 0.3;
  CHECK(mse(b, a) == doctest::Approx(0.09).epsilon(1e-12));

  std::vector<double> z(160000, 0.0), one = z;
  one[12345] = 1.0;
  CHECK(mse(one, z) == doctest::Approx(6.25e-6).epsilon(1e-12));

  CHECK_THROWS_AS(mse(a, z), ShapeMismatch);
  CHECK_THROWS_AS(mse(std::vector<double>{}, std::vector<double>{}), ShapeMismatch);
}

TEST_CASE("improvement ratio") {
  CHECK(std::abs(improvement_ratio(1.15e-2, 3.11e-1) - 96.3) < 0.05);
  CHECK(std::abs(improvement_ratio(2.12e-1, 2.65e+1) - 99.2) < 0.05);
  CHECK(improvement_ratio(0.4, 0.4) == 0.0);
  CHECK(improvement_ratio(0.8, 0.4) < 0.0);
  CHECK(improvement_ratio(0.1, 0.4) > improvement_ratio(0.2, 0.4));
  CHECK_THROWS_AS(improvement_ratio(0.1, 0.0), InvalidArgument);
}

TEST_CASE("oracle against itself is exact on every case") {
  for (auto label : {"1A", "1B", "2A", "2B", "3A", "3B", "2D"}) {
    CAPTURE(label);
    const auto spec = get_problem(label);
    const auto grid = spec.dim == 1 ? make_eval_grid(spec, 81, 17) : make_eval_grid(spec, 21, 9);
    const auto m = compute_metrics(spec, "oracle", grid, grid.exact);
    CHECK(m.mse_all == 0.0);
    for (double v : m.mse_t) CHECK(v == 0.0);
  }
}

TEST_CASE("slice mse tiles the full mse and snaps to grid times") {
  const auto spec = get_problem("1B");
  const auto grid = make_eval_grid(spec, 64, 11);
  std::vector<double> pred(grid.size());
  for (std::size_t j = 0; j < pred.size(); ++j) pred[j] = grid.exact[j] + 0.01 * static_cast<double>(j % 7);

  double sum = 0.0;
  for (double t : grid.points.times) sum += mse_at_time(pred, grid, t);
  CHECK(sum / static_cast<double>(grid.points.nt) == doctest::Approx(mse(pred, grid.exact)).epsilon(1e-12));

  // T = 4, times 0, 0.4, ..., 4; T/8 snaps to 0.4 and 3T/8 to 1.6.
  REQUIRE(spec.t_end == 4.0);
  CHECK(nearest_slice(grid, 0.5) == 1);
  CHECK(nearest_slice(grid, 1.5) == 4);
  CHECK(nearest_slice(grid, 0.2) == 0);  // tie goes to the earlier time
  const auto m = compute_metrics(spec, "x", grid, pred);
  CHECK(m.slice_t[0] == doctest::Approx(0.4));
  CHECK(m.slice_t[3] == doctest::Approx(3.6));
  CHECK(m.eval_nx == 64);
  CHECK(m.eval_nt == 11);
}

TEST_CASE("zero network scored against the oracle") {
  const auto spec = get_problem("1B");
  const auto grid = make_eval_grid(spec, 100, 20);
  NetworkParams zero(Architecture{6, 2, 2});
  const auto pred = predict(zero, grid);
  double sq = 0.0;
  for (double u : grid.exact) sq += u * u;
  CHECK(mse(pred, grid.exact) == doctest::Approx(sq / static_cast<double>(grid.size())).epsilon(1e-12));
}

TEST_CASE("metrics JSON round trip") {
  MetricsRecord m;
  m.case_label = "2A";
  m.method = "clinn";
  m.mse_all = 0.212;
  m.mse_t = {1e-3, 2e-3, 3e-3, 4e-3};
  m.slice_t = {0.1, 0.4, 0.6, 0.9};
  m.eval_nx = 800;
  m.eval_nt = 200;
  auto back = metrics_from_json(metrics_to_json(m));
  CHECK(back.case_label == "2A");
  CHECK(back.method == "clinn");
  CHECK(back.mse_all == m.mse_all);
  CHECK(back.mse_t == m.mse_t);
  CHECK(back.slice_t == m.slice_t);
  CHECK(!back.improvement_vs_pinn);

  m.improvement_vs_pinn = 99.2;
  back = metrics_from_json(metrics_to_json(m));
  REQUIRE(back.improvement_vs_pinn);
  CHECK(*back.improvement_vs_pinn == 99.2);

  CHECK_THROWS_AS(metrics_from_json("{\"case\": \"1A\"}"), ParseError);
  CHECK_THROWS_AS(metrics_from_json("not json"), ParseError);
  CHECK_THROWS_AS(read_metrics("/nonexistent/metrics.json"), ParseError);
}

TEST_CASE("compare table") {
  MetricsRecord pinn{"1B", "pinn", 3.11e-1, {}, {}, 800, 200, {}};
  MetricsRecord clinn{"1B", "clinn", 1.15e-2, {}, {}, 800, 200, {}};

  const std::vector<MetricsRecord> both{clinn, pinn};
  const auto table = compare_table(both);
  CHECK(table.find("improvement") != std::string::npos);
  CHECK(table.find("96.3%") != std::string::npos);

  const std::vector<MetricsRecord> only{pinn};
  CHECK(compare_table(only).find("improvement") == std::string::npos);

  const std::vector<MetricsRecord> same{pinn, pinn};
  CHECK(compare_table(same).find("0.0%") != std::string::npos);

  MetricsRecord other = clinn;
  other.case_label = "1A";
  const std::vector<MetricsRecord> mixed{pinn, other};
  CHECK_THROWS_AS(compare_table(mixed), InvalidArgument);
}

TEST_CASE("export writes deterministic artifacts") {
  const auto spec = get_problem("2A");
  const auto grid = make_eval_grid(spec, 50, 12);
  const auto net = init_params(Architecture{6, 2, 2}, 3);
  const auto pred = predict(net, grid);

  const auto a = scratch("a"), b = scratch("b");
  export_prediction(spec, grid, pred, a);
  export_prediction(spec, grid, pred, b);
  for (auto name : {"prediction.csv", "heatmap_pred.svg", "heatmap_err.svg", "profiles.svg"}) {
    CAPTURE(name);
    REQUIRE(std::filesystem::exists(a / name));
    CHECK(slurp(a / name) == slurp(b / name));
  }
  const auto csv = slurp(a / "prediction.csv");
  CHECK(count_lines(csv) == 12 * 50 + 1);
  CHECK(csv.rfind("t,x,u_pred,u_exact,abs_err\n", 0) == 0);
  // Heatmap colour bar is labelled with the case bounds.
  const auto svg = slurp(a / "heatmap_pred.svg");
  CHECK(svg.find(">1<") != std::string::npos);
  CHECK(svg.find(">19<") != std::string::npos);

  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("export in 2D") {
  const auto spec = get_problem("2D");
  const auto grid = make_eval_grid(spec, 11, 4);
  const auto dir = scratch("2d");
  export_prediction(spec, grid, grid.exact, dir);
  const auto csv = slurp(dir / "prediction.csv");
  CHECK(count_lines(csv) == 4 * 11 * 11 + 1);
  CHECK(csv.rfind("t,x,y,u_pred,u_exact,abs_err\n", 0) == 0);
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(export_prediction(spec, grid, std::vector<double>(3), dir), ShapeMismatch);
}

TEST_CASE("write_text names the path on failure") {
  try {
    write_text("/nonexistent_dir/x.txt", "x");
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("/nonexistent_dir/x.txt") != std::string::npos);
  }
}
