#pragma once

// Artificial-neuron shock indicator: a fixed sigmoid unit over the jump of
// neighbour-averaged characteristic speeds and the local mesh size. 2D uses
// dimensional splitting with a max over the two axis outputs.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "clinn/problems.hpp"

namespace clinn::indicator {

struct IndicatorParams {
  double W = 10.0;
  double M = -12.0;
  double C = -1.0;
};

inline constexpr double kFlagThreshold = 0.5;

/// Sigmoid(W (lbar_l - lbar_r) + M dx + C). Requires dx > 0.
double an_out(double lbar_l, double lbar_r, double dx, const IndicatorParams& params = {});

/// Cells [edges[j], edges[j + 1]] with strictly increasing edges.
class Mesh1D {
 public:
  explicit Mesh1D(std::vector<double> edges);
  /// `cells` equal cells covering [p, q].
  static Mesh1D uniform(double p, double q, std::size_t cells);
  /// Cells centred on the given equally spaced nodes (outer cells extend half
  /// a spacing past the end nodes).
  static Mesh1D centered(std::span<const double> nodes);

  std::size_t cells() const noexcept { return edges_.size() - 1; }
  double center(std::size_t j) const { return 0.5 * (edges_[j] + edges_[j + 1]); }
  double width(std::size_t j) const { return edges_[j + 1] - edges_[j]; }
  std::span<const double> edges() const noexcept { return edges_; }

 private:
  std::vector<double> edges_;
};

/// Raw outputs and flags, row-major (iy * nx + ix); ny = 1 in 1D.
struct FlagGrid {
  std::size_t nx = 0;
  std::size_t ny = 1;
  std::vector<double> out;
  std::vector<std::uint8_t> flag;

  bool flagged(std::size_t ix, std::size_t iy = 0) const { return flag[iy * nx + ix] != 0; }
  std::size_t count() const;
};

/// Midpoint-rule speeds lambda(u(x_j)); u holds one value per cell centre.
FlagGrid detect_1d(const Mesh1D& mesh, std::span<const double> u, const Flux& flux,
                   const IndicatorParams& params = {});

/// u is row-major over (y cells) x (x cells); flux[0] acts along x, flux[1] along y.
FlagGrid detect_2d(const Mesh1D& mesh_x, const Mesh1D& mesh_y, std::span<const double> u,
                   std::span<const Flux> flux, const IndicatorParams& params = {});

}  // namespace clinn::indicator
