#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clinn/network.hpp"
#include "clinn/problems.hpp"

namespace clinn::evalreport {

/// Uniform evaluation grid with the oracle solution at every node. Ordering
/// matches sample_grid: t-major, then y, then x.
struct EvalGrid {
  CollocationSet points;
  std::vector<double> exact;

  std::size_t size() const noexcept { return exact.size(); }
  std::size_t slice_size() const noexcept { return size() / points.nt; }
};

EvalGrid make_eval_grid(const ProblemSpec& spec, std::size_t nx, std::size_t nt);

/// Network prediction on every grid node.
std::vector<double> predict(const NetworkParams& params, const EvalGrid& grid);

/// Mean of squared differences. Throws ShapeMismatch on differing sizes.
double mse(std::span<const double> pred, std::span<const double> exact);

/// Index of the grid time nearest to t (ties to the earlier time).
std::size_t nearest_slice(const EvalGrid& grid, double t);

/// mse restricted to the time slice nearest t.
double mse_at_time(std::span<const double> pred, const EvalGrid& grid, double t);

/// (1 - a / b) * 100. Throws InvalidArgument when b is not positive.
double improvement_ratio(double mse_method, double mse_pinn);

struct MetricsRecord {
  std::string case_label;
  std::string method;
  double mse_all = 0.0;
  std::array<double, 4> mse_t{};      // at T/8, 3T/8, 5T/8, 7T/8
  std::array<double, 4> slice_t{};    // grid times actually used
  std::size_t eval_nx = 0;
  std::size_t eval_nt = 0;
  std::optional<double> improvement_vs_pinn;
};

/// Fractions of T at which slice errors are reported.
inline constexpr std::array<double, 4> kSliceFractions = {0.125, 0.375, 0.625, 0.875};

MetricsRecord compute_metrics(const ProblemSpec& spec, std::string method, const EvalGrid& grid,
                              std::span<const double> pred);

std::string metrics_to_json(const MetricsRecord& m);
/// Throws ParseError on malformed input.
MetricsRecord metrics_from_json(const std::string& text);
MetricsRecord read_metrics(const std::filesystem::path& path);
void write_metrics(const MetricsRecord& m, const std::filesystem::path& path);

/// Text table: one row per record with MSE_T1..T4 and MSE_All, plus an
/// improvement column against the "pinn" record when there is one and at
/// least one other record. Throws InvalidArgument on mixed cases.
std::string compare_table(std::span<const MetricsRecord> records);

/// Writes prediction.csv, heatmap_pred.svg, heatmap_err.svg and
/// profiles.svg into dir. Heatmaps use [u0_inf, u0_sup] for the prediction
/// and [0, u0_sup - u0_inf] for the error, drawn on at most 200 x 100 cells.
/// 2D cases draw the last time slice over (x, y) and profiles along x = y.
void export_prediction(const ProblemSpec& spec, const EvalGrid& grid, std::span<const double> pred,
                       const std::filesystem::path& dir);

/// Opens path for writing or throws Error naming the path.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace clinn::evalreport
