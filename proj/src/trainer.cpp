#include "clinn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <sstream>

#include "clinn/evalreport.hpp"
#include "clinn/kernels.hpp"
#include "clinn/shockgeom.hpp"

namespace clinn::trainer {

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& st) {
  const std::size_t n = params.size();
  if (grad.size() != n || st.m.size() != n || st.v.size() != n) throw ShapeMismatch("adam_step: size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(grad[i])) {
      throw NumericalError("adam_step: non-finite gradient at parameter " + std::to_string(i) + " (step " +
                           std::to_string(st.step + 1) + ")");
    }
  }
  const auto& o = st.options;
  ++st.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(st.step));
  for (std::size_t i = 0; i < n; ++i) {
    st.m[i] = o.beta1 * st.m[i] + (1.0 - o.beta1) * grad[i];
    st.v[i] = o.beta2 * st.v[i] + (1.0 - o.beta2) * grad[i] * grad[i];
    const double mh = st.m[i] / c1;
    const double vh = st.v[i] / c2;
    params[i] -= o.lr * mh / (std::sqrt(vh) + o.eps);
  }
}

namespace {

/// Candidates ordered by descending loss, ties to the lower index.
std::vector<std::size_t> top(std::span<const std::size_t> candidates, std::span<const double> loss, std::size_t k) {
  std::vector<std::size_t> order(candidates.begin(), candidates.end());
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) { return loss[a] > loss[b] || (loss[a] == loss[b] && a < b); });
  order.resize(k);
  return order;
}

}  // namespace

void rar_update(std::span<double> weights, std::span<const std::size_t> candidates, std::span<const double> gov,
                std::span<const double> im, const RarOptions& opt) {
  std::fill(weights.begin(), weights.end(), 1.0);
  for (std::size_t j : candidates) {
    if (j >= weights.size()) throw ShapeMismatch("rar_update: candidate index out of range");
  }
  if (opt.n_pt == 0) return;
  if (gov.size() != weights.size() || (!im.empty() && im.size() != weights.size())) {
    throw ShapeMismatch("rar_update: per-point losses must cover the grid");
  }
  for (std::size_t j : top(candidates, gov, opt.n_pt)) weights[j] += opt.w_eq;
  if (!im.empty()) {
    for (std::size_t j : top(candidates, im, opt.n_pt)) weights[j] += opt.w_if;
  }
}

namespace {

struct Refresh {
  std::vector<std::size_t> pd;
  std::vector<shockgeom::RhTarget> targets;
  std::size_t curves = 0;
};

Refresh locate_shocks(const ProblemSpec& spec, const CollocationSet& grid, const NetworkParams& params, double h) {
  Refresh r;
  const auto u = kernels::evaluate(params, kernels::PointBatch{grid.coords, grid.input_dim()}, false).u;
  const auto slices = shockgeom::flag_slices(spec, grid, u);
  r.pd = shockgeom::build_pd(grid, slices);
  const double vmax = shockgeom::max_characteristic_speed(spec);
  if (spec.dim == 1) {
    const auto samples = shockgeom::group_slices(grid, r.pd);
    const auto curves = shockgeom::fit_curves(samples, {.cell = grid.spacing(), .max_speed = vmax});
    r.curves = curves.size();
    r.targets = shockgeom::rh_targets_1d(spec, grid, r.pd, curves, h);
  } else {
    r.targets = shockgeom::rh_targets_2d(spec, grid, slices, r.pd, h, vmax);
  }
  return r;
}

}  // namespace

TrainResult train(const RunConfig& cfg, const ProgressFn& progress) {
  validate(cfg);
  const ProblemSpec spec = cfg.problem();
  const Architecture arch{cfg.width, cfg.depth, spec.input_dim()};
  CollocationSet grid = sample_grid(spec, cfg.grid_nx, cfg.grid_nt);
  const auto eval = evalreport::make_eval_grid(spec, cfg.eval_nx, cfg.eval_nt);
  const double h = cfg.h_offset > 0.0 ? cfg.h_offset : 2.0 * grid.spacing();

  loss::LossWeights weights = cfg.weights;
  weights.terms = loss::preset_terms(cfg.method);

  NetworkParams params = init_params(arch, cfg.seed);
  TrainResult res{params, params, 0.0, 0, {}, {}, {}};
  bool have_best = false;
  AdamState adam(params.size(), {cfg.lr, cfg.beta1, cfg.beta2, cfg.eps});
  std::vector<double> grad(params.size());
  const std::size_t total_epochs = cfg.total_epochs();

  auto diverged = [&](const std::string& why) {
    res.last = params;
    return DivergenceError(why, res);
  };

  std::vector<shockgeom::RhTarget> targets;
  std::size_t curves = 0;
  auto refresh = [&] {
    auto r = locate_shocks(spec, grid, params, h);
    grid.discontinuity = std::move(r.pd);
    targets = std::move(r.targets);
    curves = r.curves;
  };

  std::size_t epoch = 0;
  for (std::size_t round = 0; round < cfg.epochs.size(); ++round) {
    try {
      if (weights.terms.rh && (round > 0 || cfg.pd_refresh > 0)) refresh();
      if (round > 0) {
        grid.reset_weights();
        const loss::LossAssembler probe(spec, grid, targets, weights);
        const auto b = probe.evaluate(params);
        rar_update(grid.rar_weights, probe.residual_points(), b.gov_point,
                   weights.terms.im ? std::span<const double>(b.im_point) : std::span<const double>(),
                   {cfg.n_pt, cfg.w_eq, cfg.w_if});
      }
    } catch (const NumericalError& e) {
      throw diverged(std::string("refresh before round ") + std::to_string(round) + ": " + e.what());
    }
    RoundInfo info{round, epoch, grid.discontinuity.size(), targets.size(), curves, 0};
    info.n_reweighted = static_cast<std::size_t>(
        std::count_if(grid.rar_weights.begin(), grid.rar_weights.end(), [](double w) { return w > 1.0; }));
    res.rounds.push_back(info);

    std::optional<loss::LossAssembler> assembler;
    assembler.emplace(spec, grid, targets, weights);
    for (std::size_t e = 0; e < cfg.epochs[round]; ++e, ++epoch) {
      const auto t0 = std::chrono::steady_clock::now();
      EpochRecord rec;
      rec.epoch = epoch;
      rec.round = round;
      try {
        // Within a round P_D and the jump targets follow the current prediction.
        if (weights.terms.rh && cfg.pd_refresh > 0 && e > 0 && e % cfg.pd_refresh == 0) {
          refresh();
          assembler.emplace(spec, grid, targets, weights);
        }
      } catch (const NumericalError& ex) {
        res.history.push_back(rec);
        throw diverged("epoch " + std::to_string(epoch) + ": " + ex.what());
      }
      rec.n_pd = grid.discontinuity.size();
      try {
        const auto b = assembler->evaluate(params, grad);
        rec.gov = b.gov;
        rec.ic = b.ic;
        rec.bc = b.bc;
        rec.im = b.im;
        rec.bd = b.bd;
        rec.rh = b.rh;
        rec.total = b.total;
        rec.rh_used = b.rh_used;
        if (!std::isfinite(b.total) || b.total > kDivergenceLimit) {
          res.history.push_back(rec);
          char msg[96];
          std::snprintf(msg, sizeof msg, "loss diverged at epoch %zu (total %.6g)", epoch, b.total);
          throw diverged(msg);
        }
        adam_step(params.values(), grad, adam);
      } catch (const DivergenceError&) {
        throw;
      } catch (const NumericalError& e) {
        res.history.push_back(rec);
        throw diverged("epoch " + std::to_string(epoch) + ": " + e.what());
      }

      if ((epoch + 1) % cfg.eval_every == 0 || epoch + 1 == total_epochs) {
        const double m = evalreport::mse(evalreport::predict(params, eval), eval.exact);
        rec.eval_mse = m;
        if (!have_best || m < res.best_mse) {
          have_best = true;
          res.best = params;
          res.best_mse = m;
          res.best_epoch = epoch;
        }
      }
      res.history.push_back(rec);
      res.epoch_ms.push_back(
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
      if (progress) progress(rec);
    }
  }
  res.last = params;
  return res;
}

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string history_csv(std::span<const EpochRecord> history) {
  std::ostringstream s;
  s << "epoch,round,gov,ic,bc,im,bd,rh,total,eval_mse,n_pd,rh_used\n";
  for (const auto& r : history) {
    s << r.epoch << ',' << r.round << ',' << g17(r.gov) << ',' << g17(r.ic) << ',' << g17(r.bc) << ',' << g17(r.im)
      << ',' << g17(r.bd) << ',' << g17(r.rh) << ',' << g17(r.total) << ',';
    if (r.eval_mse) s << g17(*r.eval_mse);
    s << ',' << r.n_pd << ',' << r.rh_used << '\n';
  }
  return s.str();
}

std::string timing_csv(std::span<const double> epoch_ms) {
  std::ostringstream s;
  s << "epoch,wall_ms\n";
  for (std::size_t i = 0; i < epoch_ms.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", epoch_ms[i]);
    s << i << ',' << buf << '\n';
  }
  return s.str();
}

}  // namespace clinn::trainer
