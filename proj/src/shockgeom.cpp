#include "clinn/shockgeom.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace clinn::shockgeom {

using indicator::FlagGrid;
using indicator::Mesh1D;

namespace {

std::size_t slice_size(const CollocationSet& grid) { return grid.dim == 1 ? grid.nx : grid.nx * grid.nx; }

struct Cluster {
  double centroid;
  std::vector<std::size_t> ids;
};

std::vector<Cluster> cluster_slice(const SliceSamples& slice, double gap) {
  std::vector<std::size_t> order(slice.xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return slice.xs[a] < slice.xs[b]; });
  std::vector<Cluster> out;
  double sum = 0.0;
  std::size_t n = 0;
  std::vector<std::size_t> ids;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    if (n > 0 && slice.xs[i] - slice.xs[order[k - 1]] > gap) {
      out.push_back({sum / static_cast<double>(n), std::move(ids)});
      sum = 0.0;
      n = 0;
      ids.clear();
    }
    sum += slice.xs[i];
    ++n;
    if (!slice.ids.empty()) ids.push_back(slice.ids[i]);
  }
  if (n > 0) out.push_back({sum / static_cast<double>(n), std::move(ids)});
  return out;
}

double predict(const ShockCurve& c, double t) {
  const std::size_t n = c.t.size();
  if (n == 1) return c.x[0];
  const double v = (c.x[n - 1] - c.x[n - 2]) / (c.t[n - 1] - c.t[n - 2]);
  return c.x[n - 1] + v * (t - c.t[n - 1]);
}

void finish_speeds(ShockCurve& c) {
  const std::size_t n = c.t.size();
  c.s.clear();
  if (n < 2) return;
  c.s.resize(n);
  // Least-squares slope over up to two neighbours on each side.
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t a = k >= 2 ? k - 2 : 0;
    const std::size_t b = std::min(n - 1, k + 2);
    double mt = 0.0, mx = 0.0;
    for (std::size_t i = a; i <= b; ++i) {
      mt += c.t[i];
      mx += c.x[i];
    }
    const double m = static_cast<double>(b - a + 1);
    mt /= m;
    mx /= m;
    double stt = 0.0, stx = 0.0;
    for (std::size_t i = a; i <= b; ++i) {
      stt += (c.t[i] - mt) * (c.t[i] - mt);
      stx += (c.t[i] - mt) * (c.x[i] - mx);
    }
    c.s[k] = stx / stt;
  }
}

/// Segment index for interpolation at t (clamped to the end segments).
std::size_t segment(const std::vector<double>& ts, double t) {
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t k = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
  return std::min(k, ts.size() - 2);
}

double interp(const std::vector<double>& ts, const std::vector<double>& ys, double t) {
  if (ts.size() == 1) return ys[0];
  const std::size_t k = segment(ts, t);
  const double w = (t - ts[k]) / (ts[k + 1] - ts[k]);
  return ys[k] + w * (ys[k + 1] - ys[k]);
}

}  // namespace

std::vector<FlagGrid> flag_slices(const ProblemSpec& spec, const CollocationSet& grid, std::span<const double> u,
                                  const indicator::IndicatorParams& params) {
  if (u.size() != grid.size()) throw ShapeMismatch("flag_slices: one value per grid point expected");
  const std::size_t per = slice_size(grid);
  std::vector<FlagGrid> out;
  out.reserve(grid.nt);
  const Mesh1D mx = Mesh1D::centered(grid.axes[0]);
  for (std::size_t k = 0; k < grid.nt; ++k) {
    const auto slice = u.subspan(k * per, per);
    if (grid.dim == 1) {
      out.push_back(indicator::detect_1d(mx, slice, spec.flux[0], params));
    } else {
      const Mesh1D my = Mesh1D::centered(grid.axes[1]);
      out.push_back(indicator::detect_2d(mx, my, slice, spec.flux, params));
    }
  }
  return out;
}

std::vector<std::size_t> build_pd(const CollocationSet& grid, std::span<const FlagGrid> slices) {
  if (slices.size() != grid.nt) throw ShapeMismatch("build_pd: one flag grid per time slice expected");
  const std::size_t per = slice_size(grid);
  std::vector<std::size_t> pd;
  for (std::size_t k = 1; k < grid.nt; ++k) {
    for (std::size_t i = 0; i < per; ++i) {
      const std::size_t j = k * per + i;
      if (slices[k].flag[i] && grid.kind[j] == PointKind::Interior) pd.push_back(j);
    }
  }
  return pd;
}

std::vector<SliceSamples> group_slices(const CollocationSet& grid, std::span<const std::size_t> pd) {
  std::map<std::size_t, SliceSamples> by_slice;
  const std::size_t per = slice_size(grid);
  for (std::size_t j : pd) {
    auto& s = by_slice[j / per];
    s.t = grid.point(j)[grid.dim];
    s.xs.push_back(grid.point(j)[0]);
    s.ids.push_back(j);
  }
  std::vector<SliceSamples> out;
  for (auto& [k, s] : by_slice) out.push_back(std::move(s));
  return out;
}

double ShockCurve::position(double tt) const { return interp(t, x, tt); }

double ShockCurve::speed(double tt) const {
  if (!has_speed()) throw InvalidArgument("shock curve with one sample has no speed");
  return interp(t, s, tt);
}

std::vector<ShockCurve> fit_curves(std::span<const SliceSamples> slices, const FitOptions& options) {
  if (!(options.cell > 0.0)) throw InvalidArgument("fit_curves: cell size must be positive");
  std::vector<ShockCurve> curves;
  std::vector<std::size_t> open;  // curves ending at the previous slice
  double prev_t = 0.0;

  for (const SliceSamples& slice : slices) {
    if (!open.empty() && !(slice.t > prev_t)) throw InvalidArgument("fit_curves: slices must have increasing t");
    const auto clusters = cluster_slice(slice, options.gap_cells * options.cell);
    const double dt = slice.t - prev_t;
    const double radius = options.link_cells * options.cell + options.max_speed * dt;

    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;  // (distance, open slot, cluster)
    for (std::size_t a = 0; a < open.size(); ++a) {
      const double guess = predict(curves[open[a]], slice.t);
      for (std::size_t c = 0; c < clusters.size(); ++c) {
        const double d = std::abs(clusters[c].centroid - guess);
        if (d <= radius) pairs.emplace_back(d, a, c);
      }
    }
    std::sort(pairs.begin(), pairs.end());

    std::vector<char> used_track(open.size(), 0), used_cluster(clusters.size(), 0);
    std::vector<std::size_t> next_open;
    for (const auto& [d, a, c] : pairs) {
      if (used_track[a] || used_cluster[c]) continue;
      used_track[a] = used_cluster[c] = 1;
      ShockCurve& curve = curves[open[a]];
      curve.t.push_back(slice.t);
      curve.x.push_back(clusters[c].centroid);
      curve.points.insert(curve.points.end(), clusters[c].ids.begin(), clusters[c].ids.end());
      next_open.push_back(open[a]);
    }
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      if (used_cluster[c]) continue;
      ShockCurve curve;
      curve.t.push_back(slice.t);
      curve.x.push_back(clusters[c].centroid);
      curve.points = clusters[c].ids;
      curves.push_back(std::move(curve));
      next_open.push_back(curves.size() - 1);
    }
    std::sort(next_open.begin(), next_open.end());
    open = std::move(next_open);
    prev_t = slice.t;
  }
  for (auto& c : curves) finish_speeds(c);
  return curves;
}

SideSample side_samples(const ShockCurve& curve, double t, double h, double lo, double hi) {
  if (!(h > 0.0)) throw InvalidArgument("side_samples: offset must be positive");
  constexpr double kTol = 1e-12;
  if (t < curve.t_begin() - kTol || t > curve.t_end() + kTol) {
    throw InvalidArgument("side_samples: t outside the curve's time range");
  }
  const double g = curve.position(t);
  SideSample s;
  s.h = h;
  s.left = {std::clamp(g - h, lo, hi), t};
  s.right = {std::clamp(g + h, lo, hi), t};
  if (!(s.right[0] > s.left[0])) throw InvalidArgument("side_samples: both sides clipped to the same point");
  return s;
}

std::vector<RhTarget> rh_targets_1d(const ProblemSpec& spec, const CollocationSet& grid,
                                    std::span<const std::size_t> pd, std::span<const ShockCurve> curves, double h) {
  std::vector<char> in_pd(grid.size(), 0);
  for (std::size_t j : pd) in_pd[j] = 1;
  std::vector<RhTarget> out;
  for (const ShockCurve& c : curves) {
    if (!c.has_speed()) continue;
    for (std::size_t j : c.points) {
      if (!in_pd[j]) continue;
      const double t = grid.point(j)[1];
      SideSample side;
      try {
        side = side_samples(c, t, h, spec.lo[0], spec.hi[0]);
      } catch (const InvalidArgument&) {
        continue;
      }
      out.push_back({j, {side.left[0], t}, {side.right[0], t}, {1.0}, c.speed(t)});
    }
  }
  std::sort(out.begin(), out.end(), [](const RhTarget& a, const RhTarget& b) { return a.point < b.point; });
  return out;
}

std::vector<FrontEstimate> rh_target_2d(const FlagGrid& flags, const FlagGrid& next, std::span<const double> xs,
                                        std::span<const double> ys, double dt, double search) {
  const std::size_t nx = flags.nx, ny = flags.ny;
  if (xs.size() != nx || ys.size() != ny || next.nx != nx || next.ny != ny) {
    throw ShapeMismatch("rh_target_2d: flag grids and coordinates disagree");
  }
  if (dt == 0.0) throw InvalidArgument("rh_target_2d: dt must be nonzero");
  const double hmin = std::min(xs[1] - xs[0], ys[1] - ys[0]);
  const double strip = 1.5 * hmin;
  const auto reach = static_cast<std::ptrdiff_t>(std::ceil(search / hmin)) + 2;

  // Mean normal offset of flagged cells of g near the line through p along n,
  // restricted to offsets within [lo, hi]; picks the cluster nearest `target`.
  auto front_offset = [&](const FlagGrid& g, std::size_t ix, std::size_t iy, std::array<double, 2> n, double lo,
                          double hi, double target, double& result) {
    const std::array<double, 2> tau = {-n[1], n[0]};
    std::vector<double> offs;
    const auto cx = static_cast<std::ptrdiff_t>(ix), cy = static_cast<std::ptrdiff_t>(iy);
    for (std::ptrdiff_t jy = std::max<std::ptrdiff_t>(0, cy - reach);
         jy <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(ny) - 1, cy + reach); ++jy) {
      for (std::ptrdiff_t jx = std::max<std::ptrdiff_t>(0, cx - reach);
           jx <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(nx) - 1, cx + reach); ++jx) {
        if (!g.flagged(jx, jy)) continue;
        const double dx = xs[jx] - xs[ix], dy = ys[jy] - ys[iy];
        if (std::abs(tau[0] * dx + tau[1] * dy) > strip) continue;
        const double o = n[0] * dx + n[1] * dy;
        if (o >= lo && o <= hi) offs.push_back(o);
      }
    }
    if (offs.empty()) return false;
    double best = offs[0];
    for (double o : offs) {
      if (std::abs(o - target) < std::abs(best - target)) best = o;
    }
    double sum = 0.0;
    int count = 0;
    for (double o : offs) {
      if (std::abs(o - best) <= strip) {
        sum += o;
        ++count;
      }
    }
    result = sum / count;
    return true;
  };

  std::vector<FrontEstimate> out;
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      if (!flags.flagged(ix, iy)) continue;
      double sx = 0.0, sy = 0.0;
      std::vector<std::array<double, 2>> pts;
      for (std::size_t jy = iy >= 2 ? iy - 2 : 0; jy <= std::min(ny - 1, iy + 2); ++jy) {
        for (std::size_t jx = ix >= 2 ? ix - 2 : 0; jx <= std::min(nx - 1, ix + 2); ++jx) {
          if (!flags.flagged(jx, jy)) continue;
          pts.push_back({xs[jx], ys[jy]});
          sx += xs[jx];
          sy += ys[jy];
        }
      }
      if (pts.size() < 3) continue;  // self plus at least two neighbours
      const double mx = sx / pts.size(), my = sy / pts.size();
      double a = 0.0, b = 0.0, c = 0.0;
      for (const auto& p : pts) {
        a += (p[0] - mx) * (p[0] - mx);
        b += (p[0] - mx) * (p[1] - my);
        c += (p[1] - my) * (p[1] - my);
      }
      // Normal = eigenvector of the smaller eigenvalue of [[a, b], [b, c]].
      const double lmin = 0.5 * (a + c) - std::sqrt(0.25 * (a - c) * (a - c) + b * b);
      std::array<double, 2> v1 = {b, lmin - a}, v2 = {lmin - c, b};
      std::array<double, 2> n = std::hypot(v1[0], v1[1]) >= std::hypot(v2[0], v2[1]) ? v1 : v2;
      double len = std::hypot(n[0], n[1]);
      if (len < 1e-14) {
        n = a <= c ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
        len = 1.0;
      }
      n = {n[0] / len, n[1] / len};
      if (n[0] < 0.0 || (n[0] == 0.0 && n[1] < 0.0)) n = {-n[0], -n[1]};

      double d0 = 0.0, d1 = 0.0;
      if (!front_offset(flags, ix, iy, n, -2.0 * hmin, 2.0 * hmin, 0.0, d0)) continue;
      if (!front_offset(next, ix, iy, n, -search, search, d0, d1)) continue;
      out.push_back({ix, iy, n, (d1 - d0) / dt});
    }
  }
  return out;
}

std::vector<RhTarget> rh_targets_2d(const ProblemSpec& spec, const CollocationSet& grid,
                                    std::span<const FlagGrid> slices, std::span<const std::size_t> pd, double h,
                                    double max_speed) {
  const std::size_t per = slice_size(grid);
  std::map<std::size_t, std::vector<std::size_t>> by_slice;
  for (std::size_t j : pd) by_slice[j / per].push_back(j);

  std::vector<RhTarget> out;
  for (const auto& [k, points] : by_slice) {
    const std::size_t other = k + 1 < grid.nt ? k + 1 : k - 1;
    const double dt = grid.times[other] - grid.times[k];
    const double search = max_speed * std::abs(dt) + 2.0 * grid.spacing(0);
    const auto est = rh_target_2d(slices[k], slices[other], grid.axes[0], grid.axes[1], dt, search);
    std::map<std::size_t, const FrontEstimate*> at;
    for (const auto& e : est) at[e.iy * grid.nx + e.ix] = &e;
    for (std::size_t j : points) {
      const auto it = at.find(j % per);
      if (it == at.end()) continue;
      const FrontEstimate& e = *it->second;
      const auto p = grid.point(j);
      std::vector<double> left(3), right(3);
      for (std::size_t a = 0; a < 2; ++a) {
        left[a] = std::clamp(p[a] - h * e.normal[a], spec.lo[a], spec.hi[a]);
        right[a] = std::clamp(p[a] + h * e.normal[a], spec.lo[a], spec.hi[a]);
      }
      left[2] = right[2] = p[2];
      if (left == right) continue;
      out.push_back({j, std::move(left), std::move(right), {e.normal[0], e.normal[1]}, e.s});
    }
  }
  return out;
}

double max_characteristic_speed(const ProblemSpec& spec) {
  double m = 0.0;
  constexpr int kSamples = 1000;
  for (int i = 0; i <= kSamples; ++i) {
    const double u = spec.u0_inf + (spec.u0_sup - spec.u0_inf) * i / kSamples;
    for (const Flux& f : spec.flux) m = std::max(m, std::abs(f.speed(u)));
  }
  return m;
}

}  // namespace clinn::shockgeom
