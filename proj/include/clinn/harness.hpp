#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "clinn/config.hpp"
#include "clinn/evalreport.hpp"

namespace clinn::harness {

struct MatrixOptions {
  std::vector<std::string> cases;
  std::vector<loss::Method> methods;
  std::vector<std::uint64_t> seeds{7, 11, 13};
  bool desk = true;                                 // desk_config, else default_config
  std::optional<std::vector<std::size_t>> epochs;  // overrides the preset schedule
  std::filesystem::path out;
};

struct RunRecord {
  std::string case_label;
  loss::Method method = loss::Method::Clinn;
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  int exit_code = 0;
  std::string message;
  std::optional<evalreport::MetricsRecord> metrics;
};

struct MatrixReport {
  std::vector<RunRecord> runs;
  std::string markdown;
  std::string json;
  std::size_t failures() const;
};

/// Run directory for one (case, method, seed) under `out`.
std::filesystem::path run_dir(const std::filesystem::path& out, const std::string& case_label, loss::Method method,
                              std::uint64_t seed);

/// Trains every combination in order (case, seed, method), each into its own
/// directory, and writes report.md and report.json into options.out. A failed
/// run is recorded and the matrix continues.
MatrixReport run_matrix(const MatrixOptions& options, std::ostream& log);

/// Markdown summary: per case and seed a comparison table with improvement
/// ratios against the pinn run of the same seed, per-method medians, and the
/// list of failed runs.
std::string render_markdown(const std::vector<RunRecord>& runs);
std::string render_json(const std::vector<RunRecord>& runs);

/// Median of the values (mean of the middle two for even counts).
double median(std::vector<double> v);

}  // namespace clinn::harness
