#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clinn/config.hpp"
#include "clinn/loss.hpp"
#include "clinn/network.hpp"

namespace clinn::trainer {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moments start at zero; `step` counts completed updates.
struct AdamState {
  AdamState(std::size_t n, const AdamOptions& opt) : options(opt), m(n, 0.0), v(n, 0.0) {}
  AdamOptions options;
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

/// One bias-corrected Adam update in place. A non-finite gradient entry
/// throws NumericalError before anything is modified.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state);

struct RarOptions {
  std::size_t n_pt = 500;
  double w_eq = 33.0;
  double w_if = 16.0;
};

/// Resets every weight to 1, then adds w_eq to the n_pt candidates with the
/// largest gov loss and w_if to the n_pt with the largest im loss (ties to the
/// lower index). Losses are indexed by grid point; an empty `im` skips that
/// list. n_pt larger than the candidate count selects all of them.
void rar_update(std::span<double> weights, std::span<const std::size_t> candidates, std::span<const double> gov,
                std::span<const double> im, const RarOptions& options);

struct EpochRecord {
  std::size_t epoch = 0;  // global, from 0
  std::size_t round = 0;
  double gov = 0.0, ic = 0.0, bc = 0.0, im = 0.0, bd = 0.0, rh = 0.0, total = 0.0;
  std::optional<double> eval_mse;  // of the parameters after this epoch's update
  std::size_t n_pd = 0;
  std::size_t rh_used = 0;
};

struct RoundInfo {
  std::size_t round = 0;
  std::size_t first_epoch = 0;
  std::size_t n_pd = 0;
  std::size_t n_targets = 0;
  std::size_t n_curves = 0;
  std::size_t n_reweighted = 0;  // points with weight > 1
};

struct TrainResult {
  NetworkParams best;
  NetworkParams last;
  double best_mse = 0.0;
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> history;
  std::vector<double> epoch_ms;  // wall time per epoch, kept apart from history
  std::vector<RoundInfo> rounds;
};

/// Raised when the loss exceeds kDivergenceLimit or turns non-finite; carries
/// everything recorded up to that point.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, TrainResult partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const TrainResult& partial() const noexcept { return partial_; }

 private:
  TrainResult partial_;
};

inline constexpr double kDivergenceLimit = 1e12;

using ProgressFn = std::function<void(const EpochRecord&)>;

/// Runs the full schedule: round 0 on uniform weights and an empty P_D, then
/// before each later round the discontinuity set, jump targets and RAR
/// weights are rebuilt from the current prediction. The returned `best`
/// has the smallest recorded evaluation MSE. Deterministic for a given config.
TrainResult train(const RunConfig& cfg, const ProgressFn& progress = {});

/// Columns: epoch, round, gov, ic, bc, im, bd, rh, total, eval_mse, n_pd, rh_used.
std::string history_csv(std::span<const EpochRecord> history);
std::string timing_csv(std::span<const double> epoch_ms);

}  // namespace clinn::trainer
