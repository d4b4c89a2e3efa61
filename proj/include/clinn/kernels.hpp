#pragma once

// Batched network evaluation and parameter-gradient accumulation.
//
// Points are processed in fixed shards of kShardSize; shards are grouped
// into at most kMaxGroups contiguous reduction groups whose partial
// gradients are summed in group order. The partition depends only on the
// point count, so results are bit-identical for any OpenMP thread count.
//
// The `reference` namespace holds a serial point-by-point implementation on
// the scalar Tape. It is slow and exists to check the batched kernels.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "clinn/network.hpp"

namespace clinn::kernels {

inline constexpr std::size_t kShardSize = 256;
inline constexpr std::size_t kMaxGroups = 64;

/// Row-major view of `count` points with `dim` coordinates each.
struct PointBatch {
  std::span<const double> coords;
  std::size_t dim = 2;

  std::size_t size() const noexcept { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> point(std::size_t i) const { return coords.subspan(i * dim, dim); }
};

/// Outputs for a batch. `du` is channel-major: du[c * count + i] is the
/// derivative of u at point i with respect to input coordinate c.
struct BatchOutput {
  std::vector<double> u;
  std::vector<double> du;
};

/// Adjoint callback for one shard of points [first, first + u.size()).
/// Receives u and du (channel-major within the shard, empty without
/// tangents); must write dLoss/du into u_bar and dLoss/d(du) into du_bar.
/// Called concurrently for distinct shards.
using AdjointFn = std::function<void(std::size_t first, std::span<const double> u,
                                     std::span<const double> du, std::span<double> u_bar,
                                     std::span<double> du_bar)>;

BatchOutput evaluate(const NetworkParams& params, const PointBatch& points, bool with_tangents);

/// Adds dLoss/dtheta for the batch into `grad` (aligned with params.values()).
void accumulate_gradient(const NetworkParams& params, const PointBatch& points, bool with_tangents,
                         const AdjointFn& adjoint, std::span<double> grad);

namespace reference {

BatchOutput evaluate(const NetworkParams& params, const PointBatch& points, bool with_tangents);

void accumulate_gradient(const NetworkParams& params, const PointBatch& points, bool with_tangents,
                         const AdjointFn& adjoint, std::span<double> grad);

}  // namespace reference

}  // namespace clinn::kernels
