#include "clinn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "clinn/diff/dual.hpp"
#include "clinn/kernels.hpp"

namespace clinn::loss {

namespace {

using D = diff::Dual<double>;

std::vector<std::size_t> residual_ids(const CollocationSet& grid) {
  std::vector<std::size_t> pd = grid.discontinuity;
  std::sort(pd.begin(), pd.end());
  std::vector<std::size_t> out;
  std::set_difference(grid.interior.begin(), grid.interior.end(), pd.begin(), pd.end(), std::back_inserter(out));
  return out;
}

void append_point(std::vector<double>& coords, std::span<const double> p) {
  coords.insert(coords.end(), p.begin(), p.end());
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_target(const ProblemSpec& spec, const shockgeom::RhTarget& r) {
  if (r.left.size() != spec.input_dim() || r.right.size() != spec.input_dim() || r.normal.size() != spec.dim) {
    throw ShapeMismatch("jump target has the wrong dimension");
  }
}

}  // namespace

std::string_view method_label(Method m) {
  switch (m) {
    case Method::Clinn:
      return "clinn";
    case Method::Ifnn:
      return "ifnn";
    case Method::PinnWe:
      return "pinnwe";
    case Method::Pinn:
      return "pinn";
  }
  return "?";
}

Method parse_method(std::string_view label) {
  for (Method m : {Method::Clinn, Method::Ifnn, Method::PinnWe, Method::Pinn}) {
    if (method_label(m) == label) return m;
  }
  throw InvalidArgument("unknown method '" + std::string(label) + "' (expected clinn, ifnn, pinnwe or pinn)");
}

TermSet preset_terms(Method m) {
  switch (m) {
    case Method::Clinn:
      return {true, true, true, true, true, true};
    case Method::Ifnn:
      return {true, true, true, true, false, false};
    case Method::PinnWe:
      return {true, true, true, false, false, true};
    case Method::Pinn:
      return {true, true, true, false, false, false};
  }
  return {};
}

LossWeights preset_weights(Method m) {
  LossWeights w;
  w.terms = preset_terms(m);
  return w;
}

LossAssembler::LossAssembler(const ProblemSpec& spec, const CollocationSet& grid,
                             std::vector<shockgeom::RhTarget> targets, const LossWeights& weights)
    : spec_(spec), weights_(weights), grid_size_(grid.size()) {
  if (grid.dim != spec.dim || grid.rar_weights.size() != grid.size()) {
    throw ShapeMismatch("LossAssembler: grid does not match the problem");
  }
  const TermSet& on = weights_.terms;
  inv_interior_ = grid.interior.empty() ? 0.0 : 1.0 / static_cast<double>(grid.interior.size());
  inv_initial_ = grid.initial.empty() ? 0.0 : 1.0 / static_cast<double>(grid.initial.size());

  res_ids_ = residual_ids(grid);
  for (std::size_t j : res_ids_) {
    append_point(res_.coords, grid.point(j));
    res_.w.push_back(grid.rar_weights[j]);
  }

  auto add_data = [&](std::size_t j, bool ic) {
    const auto p = grid.point(j);
    append_point(data_.coords, p);
    data_.w.push_back(grid.rar_weights[j]);
    target_.push_back(ic ? spec_.initial(p.first(spec_.dim)) : spec_.boundary(p.first(spec_.dim), p[spec_.dim]));
    scale_.push_back(ic ? inv_initial_ : 1.0);
    is_ic_.push_back(ic ? 1 : 0);
  };
  if (on.ic) {
    for (std::size_t j : grid.initial) add_data(j, true);
  }
  if (on.bc) {
    for (std::size_t j : grid.boundary) add_data(j, false);
  }

  if (on.rh) {
    targets_ = std::move(targets);
    for (const auto& r : targets_) check_target(spec_, r);
    for (const auto& r : targets_) append_point(sides_.coords, r.left);
    for (const auto& r : targets_) append_point(sides_.coords, r.right);
    for (const auto& r : targets_) sides_.w.push_back(grid.rar_weights.at(r.point));
  }
}

LossBreakdown LossAssembler::evaluate(const NetworkParams& params) const { return run(params, {}); }

LossBreakdown LossAssembler::evaluate(const NetworkParams& params, std::span<double> grad) const {
  if (grad.size() != params.size()) throw ShapeMismatch("LossAssembler: gradient size differs from parameter count");
  std::fill(grad.begin(), grad.end(), 0.0);
  return run(params, grad);
}

LossBreakdown LossAssembler::run(const NetworkParams& params, std::span<double> grad) const {
  const TermSet& on = weights_.terms;
  const LossWeights& W = weights_;
  const bool want_grad = !grad.empty();
  const std::size_t in = spec_.input_dim();
  if (params.arch().input_dim != in) throw ShapeMismatch("LossAssembler: network input size differs from the problem");

  LossBreakdown out;
  out.gov_point.assign(grid_size_, 0.0);
  out.im_point.assign(grid_size_, 0.0);

  // Interior residual terms.
  if (!res_ids_.empty() && (on.gov || on.im || on.bd)) {
    const std::size_t n = res_ids_.size();
    std::vector<double> gv(n, 0.0), iv(n, 0.0), bv(n, 0.0);
    const bool tangents = on.gov;
    const std::size_t seeds = tangents ? 1 + in : 1;
    auto adjoint = [&](std::size_t first, std::span<const double> u, std::span<const double> du,
                       std::span<double> u_bar, std::span<double> du_bar) {
      const std::size_t m = u.size();
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t k = first + i;
        const double w = res_.w[k];
        const D uu = D::variable(u[i], seeds, 0);
        D acc(0.0, seeds);
        if (on.gov) {
          std::array<D, 3> d{};
          for (std::size_t c = 0; c < in; ++c) d[c] = D::variable(du[c * m + i], seeds, 1 + c);
          const D g = pde_residual<D>(spec_, uu, std::span<const D>(d.data(), in));
          const D v = g * g * inv_interior_;
          gv[k] = v.value();
          acc = acc + v * (W.gov * w);
        }
        if (on.im) {
          const auto p = std::span(res_.coords).subspan(k * in, in);
          const D r = implicit_residual<D>(spec_, p, uu);
          const D v = r * r * inv_interior_;
          iv[k] = v.value();
          acc = acc + v * (W.im * w);
        }
        if (on.bd) {
          const D e = exceedance<D>(spec_, uu);
          const D v = e * e * inv_interior_;
          bv[k] = v.value();
          acc = acc + v * (W.bd * w);
        }
        if (u_bar.empty()) continue;
        u_bar[i] = acc.tangent(0);
        if (tangents) {
          for (std::size_t c = 0; c < in; ++c) du_bar[c * m + i] = acc.tangent(1 + c);
        }
      }
    };
    const kernels::PointBatch batch{res_.coords, in};
    if (want_grad) {
      kernels::accumulate_gradient(params, batch, tangents, adjoint, grad);
    } else {
      const auto o = kernels::evaluate(params, batch, tangents);
      adjoint(0, o.u, o.du, {}, {});
    }
    for (std::size_t k = 0; k < n; ++k) {
      out.gov += res_.w[k] * gv[k];
      out.im += res_.w[k] * iv[k];
      out.bd += res_.w[k] * bv[k];
      out.gov_point[res_ids_[k]] = gv[k];
      out.im_point[res_ids_[k]] = iv[k];
    }
  }

  // Initial and boundary data.
  if (!target_.empty()) {
    const std::size_t n = target_.size();
    std::vector<double> val(n, 0.0);
    const double w_ic = on.ic ? W.ic : 0.0, w_bc = on.bc ? W.bc : 0.0;
    auto adjoint = [&](std::size_t first, std::span<const double> u, std::span<const double>,
                       std::span<double> u_bar, std::span<double>) {
      for (std::size_t i = 0; i < u.size(); ++i) {
        const std::size_t k = first + i;
        const double r = u[i] - target_[k];
        val[k] = r * r * scale_[k];
        if (!u_bar.empty()) u_bar[i] = 2.0 * r * scale_[k] * data_.w[k] * (is_ic_[k] ? w_ic : w_bc);
      }
    };
    const kernels::PointBatch batch{data_.coords, in};
    if (want_grad) {
      kernels::accumulate_gradient(params, batch, false, adjoint, grad);
    } else {
      const auto o = kernels::evaluate(params, batch, false);
      adjoint(0, o.u, {}, {}, {});
    }
    for (std::size_t k = 0; k < n; ++k) (is_ic_[k] ? out.ic : out.bc) += data_.w[k] * val[k];
  }

  // Jump conditions: both sides are needed before any adjoint is known.
  if (on.rh && !targets_.empty()) {
    const std::size_t n = targets_.size();
    const kernels::PointBatch batch{sides_.coords, in};
    const auto o = kernels::evaluate(params, batch, false);
    std::vector<double> mis(n, 0.0), dl(n, 0.0), dr(n, 0.0);
    std::vector<std::uint8_t> used(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      const double ul = o.u[k], ur = o.u[n + k];
      if (std::abs(ul - ur) < kMinJump) {
        ++out.rh_skipped;
        continue;
      }
      used[k] = 1;
      ++out.rh_used;
      const D m = jump_mismatch<D>(spec_, targets_[k].normal, targets_[k].s, D::variable(ul, 2, 0),
                                   D::variable(ur, 2, 1));
      mis[k] = std::abs(m.value());
      dl[k] = sign(m.value()) * m.tangent(0);
      dr[k] = sign(m.value()) * m.tangent(1);
    }
    if (out.rh_used > 0) {
      const double inv_used = 1.0 / static_cast<double>(out.rh_used);
      for (std::size_t k = 0; k < n; ++k) {
        if (used[k]) out.rh += sides_.w[k] * mis[k] * inv_used;
      }
      if (want_grad) {
        std::vector<double> u_bar(2 * n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
          const double c = W.rh * sides_.w[k] * inv_used;
          u_bar[k] = c * dl[k];
          u_bar[n + k] = c * dr[k];
        }
        auto adjoint = [&](std::size_t first, std::span<const double> u, std::span<const double>,
                           std::span<double> ub, std::span<double>) {
          for (std::size_t i = 0; i < u.size(); ++i) ub[i] = u_bar[first + i];
        };
        kernels::accumulate_gradient(params, batch, false, adjoint, grad);
      }
    }
  }

  if (on.gov) out.total += W.gov * out.gov;
  if (on.ic) out.total += W.ic * out.ic;
  if (on.bc) out.total += W.bc * out.bc;
  if (on.im) out.total += W.im * out.im;
  if (on.bd) out.total += W.bd * out.bd;
  if (on.rh) out.total += W.rh * out.rh;
  return out;
}

namespace reference {

diff::ValueAndGradient value_and_gradient(const ProblemSpec& spec, const CollocationSet& grid,
                                          std::span<const shockgeom::RhTarget> targets, const LossWeights& weights,
                                          const NetworkParams& params) {
  using diff::Var;
  using DV = diff::Dual<Var>;
  const Architecture arch = params.arch();
  if (spec.input_dim() > 3 || arch.input_dim != spec.input_dim()) {
    throw ShapeMismatch("reference loss: network input size differs from the problem");
  }
  const std::size_t in = std::min<std::size_t>(spec.input_dim(), 3);
  const TermSet& on = weights.terms;
  const std::vector<std::size_t> res = residual_ids(grid);
  const double inv_n = grid.interior.empty() ? 0.0 : 1.0 / static_cast<double>(grid.interior.size());
  const double inv_i = grid.initial.empty() ? 0.0 : 1.0 / static_cast<double>(grid.initial.size());

  auto loss = [&](std::span<const Var> theta) -> Var {
    auto plain = [&](std::span<const double> p) {
      std::array<Var, 3> x{};
      for (std::size_t c = 0; c < in; ++c) x[c] = Var(p[c]);
      return forward_generic<Var, Var>(arch, theta, std::span<const Var>(x.data(), in));
    };
    Var gov(0.0), im(0.0), bd(0.0), ic(0.0), bc(0.0), rh(0.0);
    for (std::size_t j : res) {
      const auto p = grid.point(j);
      const double w = grid.rar_weights[j];
      std::vector<DV> x;
      for (std::size_t c = 0; c < in; ++c) x.push_back(DV::variable(Var(p[c]), in, c));
      const DV o = forward_generic<Var, DV>(arch, theta, std::span<const DV>(x.data(), in));
      const Var u = o.value();
      if (on.gov) {
        std::array<Var, 3> du{};
        for (std::size_t c = 0; c < in; ++c) du[c] = o.tangent(c);
        const Var g = pde_residual<Var>(spec, u, std::span<const Var>(du.data(), in));
        gov = gov + g * g * (inv_n * w);
      }
      if (on.im) {
        const Var r = implicit_residual<Var>(spec, p, u);
        im = im + r * r * (inv_n * w);
      }
      if (on.bd) {
        const Var e = exceedance<Var>(spec, u);
        bd = bd + e * e * (inv_n * w);
      }
    }
    if (on.ic) {
      for (std::size_t j : grid.initial) {
        const auto p = grid.point(j);
        const Var r = plain(p) - spec.initial(p.first(spec.dim));
        ic = ic + r * r * (inv_i * grid.rar_weights[j]);
      }
    }
    if (on.bc) {
      for (std::size_t j : grid.boundary) {
        const auto p = grid.point(j);
        const Var r = plain(p) - spec.boundary(p.first(spec.dim), p[spec.dim]);
        bc = bc + r * r * grid.rar_weights[j];
      }
    }
    if (on.rh) {
      std::vector<Var> terms;
      for (const auto& t : targets) {
        check_target(spec, t);
        const Var ul = plain(t.left), ur = plain(t.right);
        if (std::abs(ul.value() - ur.value()) < kMinJump) continue;
        terms.push_back(diff::abs(jump_mismatch<Var>(spec, t.normal, t.s, ul, ur)) * grid.rar_weights.at(t.point));
      }
      for (const Var& v : terms) rh = rh + v * (1.0 / static_cast<double>(terms.size()));
    }
    Var total(0.0);
    if (on.gov) total = total + gov * weights.gov;
    if (on.ic) total = total + ic * weights.ic;
    if (on.bc) total = total + bc * weights.bc;
    if (on.im) total = total + im * weights.im;
    if (on.bd) total = total + bd * weights.bd;
    if (on.rh) total = total + rh * weights.rh;
    return total;
  };
  return diff::loss_gradient(loss, params.values());
}

}  // namespace reference

}  // namespace clinn::loss
