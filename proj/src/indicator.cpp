#include "clinn/indicator.hpp"

#include <algorithm>
#include <numeric>

#include "clinn/diff/scalar.hpp"

namespace clinn::indicator {

namespace {

/// One line of cells: out_j from lambda values and widths along the line.
/// Ends replicate the nearest interior cell.
void line_outputs(std::span<const double> lambda, std::span<const double> h, const IndicatorParams& params,
                  std::span<double> out) {
  const std::size_t n = lambda.size();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t l = j == 0 ? 0 : j - 1;
    const std::size_t r = j + 1 == n ? j : j + 1;
    const double lbar_l = (h[l] * lambda[l] + h[j] * lambda[j]) / (h[l] + h[j]);
    const double lbar_r = (h[r] * lambda[r] + h[j] * lambda[j]) / (h[r] + h[j]);
    const double dx = std::max({h[l], h[j], h[r]});
    out[j] = an_out(lbar_l, lbar_r, dx, params);
  }
}

std::vector<double> widths(const Mesh1D& mesh) {
  std::vector<double> h(mesh.cells());
  for (std::size_t j = 0; j < h.size(); ++j) h[j] = mesh.width(j);
  return h;
}

void set_flags(FlagGrid& g) {
  g.flag.resize(g.out.size());
  for (std::size_t i = 0; i < g.out.size(); ++i) g.flag[i] = g.out[i] > kFlagThreshold ? 1 : 0;
}

}  // namespace

double an_out(double lbar_l, double lbar_r, double dx, const IndicatorParams& params) {
  if (!(dx > 0.0)) throw InvalidArgument("an_out: dx must be positive");
  return diff::sigmoid(params.W * (lbar_l - lbar_r) + params.M * dx + params.C);
}

Mesh1D::Mesh1D(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) throw InvalidArgument("Mesh1D: need at least one cell");
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (!(edges_[i] > edges_[i - 1])) throw InvalidArgument("Mesh1D: edges must be strictly increasing");
  }
}

Mesh1D Mesh1D::uniform(double p, double q, std::size_t cells) {
  if (cells == 0 || !(q > p)) throw InvalidArgument("Mesh1D::uniform: empty interval");
  std::vector<double> e(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) e[i] = p + (q - p) * static_cast<double>(i) / static_cast<double>(cells);
  e.back() = q;
  return Mesh1D(std::move(e));
}

Mesh1D Mesh1D::centered(std::span<const double> nodes) {
  if (nodes.size() < 2) throw InvalidArgument("Mesh1D::centered: need at least two nodes");
  std::vector<double> e(nodes.size() + 1);
  for (std::size_t i = 1; i < nodes.size(); ++i) e[i] = 0.5 * (nodes[i - 1] + nodes[i]);
  e.front() = nodes.front() - (e[1] - nodes.front());
  e.back() = nodes.back() + (nodes.back() - e[nodes.size() - 1]);
  return Mesh1D(std::move(e));
}

std::size_t FlagGrid::count() const { return static_cast<std::size_t>(std::count(flag.begin(), flag.end(), 1)); }

FlagGrid detect_1d(const Mesh1D& mesh, std::span<const double> u, const Flux& flux, const IndicatorParams& params) {
  const std::size_t n = mesh.cells();
  if (n < 3) throw InvalidArgument("detect_1d: need at least 3 cells");
  if (u.size() != n) throw ShapeMismatch("detect_1d: one value per cell expected");
  std::vector<double> lambda(n);
  for (std::size_t j = 0; j < n; ++j) lambda[j] = flux.speed(u[j]);
  FlagGrid g;
  g.nx = n;
  g.out.resize(n);
  line_outputs(lambda, widths(mesh), params, g.out);
  set_flags(g);
  return g;
}

FlagGrid detect_2d(const Mesh1D& mesh_x, const Mesh1D& mesh_y, std::span<const double> u,
                   std::span<const Flux> flux, const IndicatorParams& params) {
  const std::size_t nx = mesh_x.cells();
  const std::size_t ny = mesh_y.cells();
  if (nx < 3 || ny < 3) throw InvalidArgument("detect_2d: need at least 3 cells per axis");
  if (u.size() != nx * ny) throw ShapeMismatch("detect_2d: one value per cell expected");
  if (flux.size() != 2) throw InvalidArgument("detect_2d: two flux components expected");

  FlagGrid g;
  g.nx = nx;
  g.ny = ny;
  g.out.assign(nx * ny, 0.0);
  const auto hx = widths(mesh_x);
  const auto hy = widths(mesh_y);

  std::vector<double> lam(nx), out(nx);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) lam[ix] = flux[0].speed(u[iy * nx + ix]);
    line_outputs(lam, hx, params, out);
    std::copy(out.begin(), out.end(), g.out.begin() + iy * nx);
  }
  lam.resize(ny);
  out.resize(ny);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) lam[iy] = flux[1].speed(u[iy * nx + ix]);
    line_outputs(lam, hy, params, out);
    for (std::size_t iy = 0; iy < ny; ++iy) g.out[iy * nx + ix] = std::max(g.out[iy * nx + ix], out[iy]);
  }
  set_flags(g);
  return g;
}

}  // namespace clinn::indicator
