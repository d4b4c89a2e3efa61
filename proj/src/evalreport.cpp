#include "clinn/evalreport.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "clinn/kernels.hpp"
#include "clinn/oracle.hpp"

namespace clinn::evalreport {

namespace {

std::string num(double v, int digits = 10) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

struct Rgb {
  double r, g, b;
};

// Piecewise-linear approximation of the viridis map.
std::string colour(double f) {
  static constexpr std::array<Rgb, 5> stops = {
      Rgb{68, 1, 84}, Rgb{59, 82, 139}, Rgb{33, 145, 140}, Rgb{94, 201, 98}, Rgb{253, 231, 37}};
  if (!std::isfinite(f)) f = 0.0;
  f = std::clamp(f, 0.0, 1.0) * (stops.size() - 1);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(f), stops.size() - 2);
  const double w = f - static_cast<double>(k);
  auto mix = [&](double a, double b) { return static_cast<int>(std::lround(a + w * (b - a))); };
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(stops[k].r, stops[k + 1].r), mix(stops[k].g, stops[k + 1].g),
                mix(stops[k].b, stops[k + 1].b));
  return buf;
}

/// Values on a rows x cols raster (row 0 at the top) drawn as an SVG heatmap.
std::string heatmap_svg(const std::vector<double>& cells, std::size_t rows, std::size_t cols, double lo, double hi,
                        const std::string& title, const std::string& xlabel, const std::string& ylabel) {
  constexpr int kCell = 4, kLeft = 50, kTop = 30;
  const int w = static_cast<int>(cols) * kCell, h = static_cast<int>(rows) * kCell;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w + kLeft + 90 << "\" height=\"" << h + kTop + 40
    << "\">\n";
  s << "<text x=\"" << kLeft << "\" y=\"18\" font-size=\"14\">" << title << "</text>\n";
  s << "<g shape-rendering=\"crispEdges\">\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double f = hi > lo ? (cells[r * cols + c] - lo) / (hi - lo) : 0.0;
      s << "<rect x=\"" << kLeft + static_cast<int>(c) * kCell << "\" y=\"" << kTop + static_cast<int>(r) * kCell
        << "\" width=\"" << kCell << "\" height=\"" << kCell << "\" fill=\"" << colour(f) << "\"/>\n";
    }
  }
  s << "</g>\n";
  // Colour bar.
  for (int k = 0; k < 50; ++k) {
    s << "<rect x=\"" << kLeft + w + 20 << "\" y=\"" << kTop + h - (k + 1) * h / 50 << "\" width=\"12\" height=\""
      << h / 50 + 1 << "\" fill=\"" << colour((k + 0.5) / 50.0) << "\"/>\n";
  }
  s << "<text x=\"" << kLeft + w + 36 << "\" y=\"" << kTop + 10 << "\" font-size=\"11\">" << num(hi, 4) << "</text>\n";
  s << "<text x=\"" << kLeft + w + 36 << "\" y=\"" << kTop + h << "\" font-size=\"11\">" << num(lo, 4) << "</text>\n";
  s << "<text x=\"" << kLeft + w / 2 << "\" y=\"" << kTop + h + 25 << "\" font-size=\"12\">" << xlabel << "</text>\n";
  s << "<text x=\"10\" y=\"" << kTop + h / 2 << "\" font-size=\"12\">" << ylabel << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

std::size_t pick(std::size_t k, std::size_t out, std::size_t in) {
  return out <= 1 ? 0 : (k * (in - 1) + (out - 1) / 2) / (out - 1);
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error("write failed: " + path.string());
}

EvalGrid make_eval_grid(const ProblemSpec& spec, std::size_t nx, std::size_t nt) {
  EvalGrid g;
  g.points = sample_grid(spec, nx, nt);
  g.exact.resize(g.points.size());
  const std::size_t d = spec.dim;
  for (std::size_t j = 0; j < g.exact.size(); ++j) {
    const auto p = g.points.point(j);
    g.exact[j] = oracle::exact(spec, p.first(d), p[d]);
  }
  return g;
}

std::vector<double> predict(const NetworkParams& params, const EvalGrid& grid) {
  return kernels::evaluate(params, kernels::PointBatch{grid.points.coords, grid.points.input_dim()}, false).u;
}

double mse(std::span<const double> pred, std::span<const double> exact) {
  if (pred.size() != exact.size()) throw ShapeMismatch("mse: grids differ in size");
  if (pred.empty()) throw ShapeMismatch("mse: empty grid");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - exact[i]) * (pred[i] - exact[i]);
  return s / static_cast<double>(pred.size());
}

std::size_t nearest_slice(const EvalGrid& grid, double t) {
  const auto& ts = grid.points.times;
  std::size_t best = 0;
  for (std::size_t k = 1; k < ts.size(); ++k) {
    if (std::abs(ts[k] - t) < std::abs(ts[best] - t)) best = k;
  }
  return best;
}

double mse_at_time(std::span<const double> pred, const EvalGrid& grid, double t) {
  if (pred.size() != grid.size()) throw ShapeMismatch("mse_at_time: prediction does not match the grid");
  const std::size_t per = grid.slice_size();
  const std::size_t k = nearest_slice(grid, t);
  return mse(pred.subspan(k * per, per), std::span(grid.exact).subspan(k * per, per));
}

double improvement_ratio(double mse_method, double mse_pinn) {
  if (!(mse_pinn > 0.0)) throw InvalidArgument("improvement ratio needs a positive baseline MSE");
  return (1.0 - mse_method / mse_pinn) * 100.0;
}

MetricsRecord compute_metrics(const ProblemSpec& spec, std::string method, const EvalGrid& grid,
                              std::span<const double> pred) {
  MetricsRecord m;
  m.case_label = std::string(spec.label());
  m.method = std::move(method);
  m.mse_all = mse(pred, grid.exact);
  for (std::size_t i = 0; i < 4; ++i) {
    const double t = kSliceFractions[i] * spec.t_end;
    m.mse_t[i] = mse_at_time(pred, grid, t);
    m.slice_t[i] = grid.points.times[nearest_slice(grid, t)];
  }
  m.eval_nx = grid.points.nx;
  m.eval_nt = grid.points.nt;
  return m;
}

std::string metrics_to_json(const MetricsRecord& m) {
  nlohmann::ordered_json j;
  j["case"] = m.case_label;
  j["method"] = m.method;
  j["mse_all"] = m.mse_all;
  for (std::size_t i = 0; i < 4; ++i) j["mse_t" + std::to_string(i + 1)] = m.mse_t[i];
  j["slice_times"] = m.slice_t;
  j["eval_nx"] = m.eval_nx;
  j["eval_nt"] = m.eval_nt;
  if (m.improvement_vs_pinn) j["improvement_vs_pinn"] = *m.improvement_vs_pinn;
  return j.dump(2) + "\n";
}

MetricsRecord metrics_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetricsRecord m;
    m.case_label = j.at("case").get<std::string>();
    m.method = j.at("method").get<std::string>();
    m.mse_all = j.at("mse_all").get<double>();
    for (std::size_t i = 0; i < 4; ++i) m.mse_t[i] = j.at("mse_t" + std::to_string(i + 1)).get<double>();
    if (j.contains("slice_times")) m.slice_t = j["slice_times"].get<std::array<double, 4>>();
    m.eval_nx = j.value("eval_nx", std::size_t{0});
    m.eval_nt = j.value("eval_nt", std::size_t{0});
    if (j.contains("improvement_vs_pinn") && !j["improvement_vs_pinn"].is_null()) {
      m.improvement_vs_pinn = j["improvement_vs_pinn"].get<double>();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("metrics JSON: ") + e.what());
  }
}

MetricsRecord read_metrics(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot read " + path.string());
  std::stringstream s;
  s << f.rdbuf();
  return metrics_from_json(s.str());
}

void write_metrics(const MetricsRecord& m, const std::filesystem::path& path) { write_text(path, metrics_to_json(m)); }

std::string compare_table(std::span<const MetricsRecord> records) {
  if (records.empty()) return "";
  for (const auto& r : records) {
    if (r.case_label != records[0].case_label) {
      throw InvalidArgument("compare: mixed cases " + records[0].case_label + " and " + r.case_label);
    }
  }
  const MetricsRecord* pinn = nullptr;
  for (const auto& r : records) {
    if (r.method == "pinn") {
      pinn = &r;
      break;
    }
  }
  const bool improvement = pinn != nullptr && records.size() > 1;

  std::ostringstream s;
  char line[256];
  s << "case " << records[0].case_label << "\n";
  std::snprintf(line, sizeof line, "%-10s %11s %11s %11s %11s %11s", "method", "MSE_T1", "MSE_T2", "MSE_T3", "MSE_T4",
                "MSE_All");
  s << line << (improvement ? "  improvement" : "") << "\n";
  for (const auto& r : records) {
    std::snprintf(line, sizeof line, "%-10s %11.3e %11.3e %11.3e %11.3e %11.3e", r.method.c_str(), r.mse_t[0],
                  r.mse_t[1], r.mse_t[2], r.mse_t[3], r.mse_all);
    s << line;
    if (improvement) {
      char pct[32];
      std::snprintf(pct, sizeof pct, "  %10.1f%%", improvement_ratio(r.mse_all, pinn->mse_all));
      s << pct;
    }
    s << "\n";
  }
  return s.str();
}

void export_prediction(const ProblemSpec& spec, const EvalGrid& grid, std::span<const double> pred,
                       const std::filesystem::path& dir) {
  if (pred.size() != grid.size()) throw ShapeMismatch("export: prediction does not match the grid");
  std::filesystem::create_directories(dir);
  const auto& g = grid.points;
  const std::size_t d = spec.dim;

  {
    std::ostringstream csv;
    csv << (d == 1 ? "t,x,u_pred,u_exact,abs_err\n" : "t,x,y,u_pred,u_exact,abs_err\n");
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const auto p = g.point(j);
      csv << num(p[d]) << ',' << num(p[0]) << ',';
      if (d == 2) csv << num(p[1]) << ',';
      csv << num(pred[j]) << ',' << num(grid.exact[j]) << ',' << num(std::abs(pred[j] - grid.exact[j])) << '\n';
    }
    write_text(dir / "prediction.csv", csv.str());
  }

  // Heatmaps: (x, t) for 1D, (x, y) at the final time for 2D.
  const std::size_t cols = std::min<std::size_t>(g.nx, 200);
  const std::size_t rows = std::min<std::size_t>(d == 1 ? g.nt : g.nx, 100);
  std::vector<double> up(rows * cols), err(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t ix = pick(c, cols, g.nx);
      const std::size_t iv = pick(rows - 1 - r, rows, d == 1 ? g.nt : g.nx);
      const std::size_t j = d == 1 ? g.index(iv, ix) : g.index(g.nt - 1, ix, iv);
      up[r * cols + c] = pred[j];
      err[r * cols + c] = std::abs(pred[j] - grid.exact[j]);
    }
  }
  const std::string vlabel = d == 1 ? "t" : "y";
  const std::string where = d == 1 ? "" : " at t = " + num(g.times.back(), 4);
  write_text(dir / "heatmap_pred.svg", heatmap_svg(up, rows, cols, spec.u0_inf, spec.u0_sup,
                                                   "case " + std::string(spec.label()) + " prediction" + where, "x",
                                                   vlabel));
  write_text(dir / "heatmap_err.svg", heatmap_svg(err, rows, cols, 0.0, spec.u0_sup - spec.u0_inf,
                                                  "case " + std::string(spec.label()) + " |error|" + where, "x",
                                                  vlabel));

  // Profiles at the four report times (along x = y in 2D).
  constexpr int kW = 260, kH = 180, kPad = 30;
  const double lo = spec.u0_inf - 0.1 * (spec.u0_sup - spec.u0_inf);
  const double hi = spec.u0_sup + 0.1 * (spec.u0_sup - spec.u0_inf);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 4 * (kW + kPad) + kPad << "\" height=\""
      << kH + 3 * kPad << "\">\n";
  for (std::size_t i = 0; i < 4; ++i) {
    const std::size_t k = nearest_slice(grid, kSliceFractions[i] * spec.t_end);
    const int x0 = kPad + static_cast<int>(i) * (kW + kPad), y0 = 2 * kPad;
    svg << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << kW << "\" height=\"" << kH
        << "\" fill=\"none\" stroke=\"#888\"/>\n";
    svg << "<text x=\"" << x0 << "\" y=\"" << y0 - 8 << "\" font-size=\"12\">t = " << num(g.times[k], 4)
        << (d == 2 ? " (x = y)" : "") << "</text>\n";
    for (int series = 0; series < 2; ++series) {
      svg << "<polyline fill=\"none\" stroke=\"" << (series == 0 ? "#000" : "#d62728") << "\" stroke-width=\"1.5\""
          << (series == 1 ? " stroke-dasharray=\"4 2\"" : "") << " points=\"";
      for (std::size_t ix = 0; ix < g.nx; ++ix) {
        const std::size_t j = d == 1 ? g.index(k, ix) : g.index(k, ix, ix);
        const double v = series == 0 ? grid.exact[j] : pred[j];
        const double px = x0 + kW * static_cast<double>(ix) / static_cast<double>(g.nx - 1);
        const double py = y0 + kH * (1.0 - (std::clamp(v, lo, hi) - lo) / (hi - lo));
        svg << num(px, 6) << ',' << num(py, 6) << ' ';
      }
      svg << "\"/>\n";
    }
  }
  svg << "<text x=\"" << kPad << "\" y=\"" << kH + 2 * kPad + 20
      << "\" font-size=\"12\">black: exact, red dashed: prediction</text>\n</svg>\n";
  write_text(dir / "profiles.svg", svg.str());
}

}  // namespace clinn::evalreport
