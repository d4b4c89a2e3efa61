// Batched OpenMP kernels against the per-point tape reference.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "clinn/config.hpp"
#include "clinn/kernels.hpp"
#include "clinn/loss.hpp"

using namespace clinn;

namespace {

std::vector<double> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> x(-4.0, 12.0), t(0.0, 4.0);
  std::vector<double> c(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    c[2 * i] = x(rng);
    c[2 * i + 1] = t(rng);
  }
  return c;
}

// Sum of u plus derivatives, enough to exercise every adjoint channel.
void unit_adjoint(std::size_t, std::span<const double> u, std::span<const double>, std::span<double> u_bar,
                  std::span<double> du_bar) {
  for (std::size_t i = 0; i < u.size(); ++i) u_bar[i] = 1.0;
  for (double& v : du_bar) v = 1.0;
}

template <bool Batched>
void BM_Evaluate(benchmark::State& state) {
  const auto params = init_params(Architecture{50, 3, 2}, 7);
  const auto coords = random_points(static_cast<std::size_t>(state.range(0)), 1);
  const kernels::PointBatch batch{coords, 2};
  for (auto _ : state) {
    auto out = Batched ? kernels::evaluate(params, batch, true) : kernels::reference::evaluate(params, batch, true);
    benchmark::DoNotOptimize(out.u.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Batched>
void BM_Gradient(benchmark::State& state) {
  const auto params = init_params(Architecture{50, 3, 2}, 7);
  const auto coords = random_points(static_cast<std::size_t>(state.range(0)), 2);
  const kernels::PointBatch batch{coords, 2};
  std::vector<double> grad(params.size());
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0);
    if (Batched) {
      kernels::accumulate_gradient(params, batch, true, unit_adjoint, grad);
    } else {
      kernels::reference::accumulate_gradient(params, batch, true, unit_adjoint, grad);
    }
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

// One full-batch loss and gradient at the desk configuration.
void BM_DeskLossEpoch(benchmark::State& state) {
  const auto cfg = desk_config("1B", loss::Method::Clinn);
  const auto spec = cfg.problem();
  const auto grid = sample_grid(spec, cfg.grid_nx, cfg.grid_nt);
  const auto params = init_params(Architecture{cfg.width, cfg.depth, 2}, cfg.seed);
  loss::LossWeights w = cfg.weights;
  w.terms = loss::preset_terms(cfg.method);
  const loss::LossAssembler assembler(spec, grid, {}, w);
  std::vector<double> grad(params.size());
  for (auto _ : state) {
    auto b = assembler.evaluate(params, grad);
    benchmark::DoNotOptimize(b.total);
  }
}

}  // namespace

BENCHMARK(BM_Evaluate<true>)->Name("evaluate/batched")->Arg(256)->Arg(4096);
BENCHMARK(BM_Evaluate<false>)->Name("evaluate/reference")->Arg(256)->Arg(4096);
BENCHMARK(BM_Gradient<true>)->Name("gradient/batched")->Arg(256)->Arg(4096);
BENCHMARK(BM_Gradient<false>)->Name("gradient/reference")->Arg(256)->Arg(4096);
BENCHMARK(BM_DeskLossEpoch)->Name("loss_epoch/desk_1B")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
