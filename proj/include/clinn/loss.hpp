#pragma once

// The six loss terms and their weighted assembly.
//
//   GOV  |u_t + lambda(u) . grad u|^2 / |P_N|        over P_N \ P_D
//   IM   |u - u0(x - lambda(u) t)|^2 / |P_N|         over P_N \ P_D
//   BD   (distance of u to [inf u0, sup u0])^2 / |P_N| over P_N \ P_D
//   IC   |u - u0|^2 / |P_I|                          over P_I
//   BC   |u - u_B|^2                                 over P_B
//   RH   mean of |n . [f(u)] / [u] - s|              over jump targets
//
// Each term value already carries the per-point RAR weights w_j; the total
// multiplies it by the term weight.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "clinn/diff/tape.hpp"
#include "clinn/network.hpp"
#include "clinn/problems.hpp"
#include "clinn/shockgeom.hpp"

namespace clinn::loss {

enum class Method : std::uint8_t { Clinn, Ifnn, PinnWe, Pinn };

std::string_view method_label(Method m);
/// Accepts "clinn", "ifnn", "pinnwe", "pinn"; throws InvalidArgument otherwise.
Method parse_method(std::string_view label);

struct TermSet {
  bool gov = true;
  bool ic = true;
  bool bc = true;
  bool im = true;
  bool bd = true;
  bool rh = true;
  bool operator==(const TermSet&) const = default;
};

/// Terms enabled by each method preset.
TermSet preset_terms(Method m);

struct LossWeights {
  double gov = 1.0;
  double ic = 1000.0;
  double bc = 10.0;
  double im = 10000.0;
  double bd = 10000.0;
  double rh = 100.0;
  TermSet terms;
};

LossWeights preset_weights(Method m);

/// Jump targets whose predicted states differ by less than this are skipped.
inline constexpr double kMinJump = 1e-8;

struct LossBreakdown {
  double gov = 0.0;
  double ic = 0.0;
  double bc = 0.0;
  double im = 0.0;
  double bd = 0.0;
  double rh = 0.0;
  double total = 0.0;
  /// Unweighted per-point values, indexed by grid point; zero off P_N \ P_D.
  std::vector<double> gov_point;
  std::vector<double> im_point;
  std::size_t rh_used = 0;
  std::size_t rh_skipped = 0;

  /// Targets existed but none had a usable jump.
  bool rh_all_skipped() const noexcept { return rh_used == 0 && rh_skipped > 0; }
};

// ---- point formulas, generic over double, Dual and Var --------------------

/// u_t + sum_a lambda_a(u) u_{x_a}; du holds (u_x[, u_y], u_t).
template <class T>
T pde_residual(const ProblemSpec& spec, const T& u, std::span<const T> du) {
  T r = du[spec.dim];
  for (std::size_t a = 0; a < spec.dim; ++a) r = r + spec.flux[a].speed(u) * du[a];
  return r;
}

/// u - u0(x - lambda(u) t) with u0 taken on all of R^d.
template <class T>
T implicit_residual(const ProblemSpec& spec, std::span<const double> point, const T& u) {
  const double t = point[spec.dim];
  std::array<T, 2> arg{};
  for (std::size_t a = 0; a < spec.dim; ++a) arg[a] = T(point[a]) - spec.flux[a].speed(u) * t;
  return u - spec.u0.eval<T>(std::span<const T>(arg.data(), spec.dim));
}

/// Signed distance of u outside [u0_inf, u0_sup]; zero inside.
template <class T>
T exceedance(const ProblemSpec& spec, const T& u) {
  using diff::hard_tanh;
  return u - hard_tanh(u, spec.u0_inf, spec.u0_sup);
}

/// n . (f(ul) - f(ur)) / (ul - ur) - s.
template <class T>
T jump_mismatch(const ProblemSpec& spec, std::span<const double> normal, double s, const T& ul, const T& ur) {
  using diff::checked_div;
  const T du = ul - ur;
  T r = T(-s);
  for (std::size_t a = 0; a < spec.dim; ++a) {
    r = r + checked_div(spec.flux[a].value(ul) - spec.flux[a].value(ur), du) * normal[a];
  }
  return r;
}

/// Precomputed point sets for one (grid, P_D, jump targets, weights)
/// combination. Rebuild whenever P_D, the targets or the RAR weights change.
class LossAssembler {
 public:
  LossAssembler(const ProblemSpec& spec, const CollocationSet& grid, std::vector<shockgeom::RhTarget> targets,
                const LossWeights& weights);

  LossBreakdown evaluate(const NetworkParams& params) const;
  /// Also writes d(total)/d(theta) into grad (overwritten, not accumulated).
  LossBreakdown evaluate(const NetworkParams& params, std::span<double> grad) const;

  /// P_N \ P_D, ascending.
  const std::vector<std::size_t>& residual_points() const noexcept { return res_ids_; }
  const LossWeights& weights() const noexcept { return weights_; }

 private:
  struct Batch {
    std::vector<double> coords;
    std::vector<double> w;  // RAR weight per point
  };
  LossBreakdown run(const NetworkParams& params, std::span<double> grad) const;

  ProblemSpec spec_;
  LossWeights weights_;
  std::size_t grid_size_ = 0;
  double inv_interior_ = 0.0;
  double inv_initial_ = 0.0;

  std::vector<std::size_t> res_ids_;
  Batch res_;

  Batch data_;                 // P_I then P_B
  std::vector<double> target_; // u0 or u_B per data point
  std::vector<double> scale_;  // 1/|P_I| or 1
  std::vector<std::uint8_t> is_ic_;

  std::vector<shockgeom::RhTarget> targets_;
  Batch sides_;                // all left points, then all right points
};

namespace reference {

/// The whole loss recorded on one tape: slow, independent of the batched
/// kernels, for checking gradients.
diff::ValueAndGradient value_and_gradient(const ProblemSpec& spec, const CollocationSet& grid,
                                          std::span<const shockgeom::RhTarget> targets, const LossWeights& weights,
                                          const NetworkParams& params);

}  // namespace reference

}  // namespace clinn::loss
