#pragma once

// From indicator flags to discontinuity points, fitted shock trajectories and
// the side samples used by the jump-condition loss.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "clinn/indicator.hpp"
#include "clinn/problems.hpp"

namespace clinn::shockgeom {

/// Indicator flags on every time slice of a training grid, using cells
/// centred on the grid nodes. `u` holds one value per grid point.
std::vector<indicator::FlagGrid> flag_slices(const ProblemSpec& spec, const CollocationSet& grid,
                                             std::span<const double> u,
                                             const indicator::IndicatorParams& params = {});

/// Indices of flagged interior points (a subset of P_N), ascending.
std::vector<std::size_t> build_pd(const CollocationSet& grid, std::span<const indicator::FlagGrid> slices);

/// Flagged x positions of one time slice (1D).
struct SliceSamples {
  double t = 0.0;
  std::vector<double> xs;
  std::vector<std::size_t> ids;  // optional point ids, parallel to xs
};

/// Groups P_D points by time slice.
std::vector<SliceSamples> group_slices(const CollocationSet& grid, std::span<const std::size_t> pd);

struct FitOptions {
  double cell = 0.0;          // grid spacing; required
  double gap_cells = 3.0;     // larger gaps split clusters
  double link_cells = 5.0;    // linking radius around the predicted position
  double max_speed = 0.0;     // bound on |lambda|; widens the radius by max_speed * dt
};

/// Piecewise-linear trajectory through per-slice cluster centroids.
struct ShockCurve {
  std::vector<double> t;  // strictly increasing
  std::vector<double> x;
  std::vector<double> s;  // local least-squares slope; empty when t has one sample
  std::vector<std::size_t> points;  // ids of the member samples, when given

  bool has_speed() const noexcept { return t.size() >= 2; }
  double t_begin() const { return t.front(); }
  double t_end() const { return t.back(); }
  bool covers(double tt) const { return tt >= t.front() && tt <= t.back(); }
  double position(double tt) const;
  double speed(double tt) const;
};

std::vector<ShockCurve> fit_curves(std::span<const SliceSamples> slices, const FitOptions& options);

struct SideSample {
  std::array<double, 2> left;   // (x, t)
  std::array<double, 2> right;  // (x, t)
  double h = 0.0;
};

/// (gamma(t) - h, t) and (gamma(t) + h, t), clipped to [lo, hi]. Throws when
/// t is outside the curve or both sides collapse to one point.
SideSample side_samples(const ShockCurve& curve, double t, double h, double lo, double hi);

/// One jump-condition constraint: states sampled at `left` and `right`
/// (coordinates in network input layout), target normal speed `s` along
/// `normal`, RAR weight of the originating P_D point.
struct RhTarget {
  std::size_t point = 0;       // originating P_D index
  std::vector<double> left;
  std::vector<double> right;
  std::vector<double> normal;  // unit, one entry per space dimension
  double s = 0.0;
};

/// 1D targets: every P_D point on a curve with a speed estimate contributes
/// side samples around gamma(t_j) and target s(t_j).
std::vector<RhTarget> rh_targets_1d(const ProblemSpec& spec, const CollocationSet& grid,
                                    std::span<const std::size_t> pd, std::span<const ShockCurve> curves, double h);

/// Local front normal and normal speed at one flagged cell of a 2D slice.
struct FrontEstimate {
  std::size_t ix = 0;
  std::size_t iy = 0;
  std::array<double, 2> normal{};
  double s = 0.0;
};

/// Least-squares front line over flagged cells in a 5x5 window gives the
/// normal; the displacement of the front to the `next` slice along the normal
/// divided by dt gives s (dt may be negative for a backward difference).
/// Cells with fewer than 2 flagged neighbours are skipped. `search` bounds the
/// normal displacement looked at in the next slice.
std::vector<FrontEstimate> rh_target_2d(const indicator::FlagGrid& flags, const indicator::FlagGrid& next,
                                        std::span<const double> xs, std::span<const double> ys, double dt,
                                        double search);

/// 2D targets for every P_D point with a front estimate; sides at x -+ h n.
std::vector<RhTarget> rh_targets_2d(const ProblemSpec& spec, const CollocationSet& grid,
                                    std::span<const indicator::FlagGrid> slices, std::span<const std::size_t> pd,
                                    double h, double max_speed);

/// max |lambda(u)| over u in [u0_inf, u0_sup], all components (sampled).
double max_characteristic_speed(const ProblemSpec& spec);

}  // namespace clinn::shockgeom
