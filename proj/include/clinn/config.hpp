#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clinn/loss.hpp"
#include "clinn/problems.hpp"

namespace clinn {

/// Everything a training run depends on. Serialised as flat JSON.
struct RunConfig {
  std::string case_label = "1B";
  loss::Method method = loss::Method::Clinn;

  std::size_t width = 100;
  std::size_t depth = 5;

  loss::LossWeights weights;  // terms follow the method

  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  std::vector<std::size_t> epochs{5000, 5000};  // one entry per round; rounds - 1 RAR refreshes
  std::size_t n_pt = 500;
  double w_eq = 33.0;
  double w_if = 16.0;

  std::size_t grid_nx = 512;
  std::size_t grid_nt = 64;
  std::size_t eval_nx = 800;
  std::size_t eval_nt = 200;
  std::size_t eval_every = 1000;
  std::size_t pd_refresh = 0;  // epochs between extra rebuilds of P_D within a round; 0: round boundaries only

  std::uint64_t seed = 7;
  double h_offset = 0.0;  // side offset for jump samples; 0 means 2 grid spacings
  std::string out;

  std::size_t total_epochs() const;
  ProblemSpec problem() const { return get_problem(case_label); }
};

/// Full-scale settings. Baselines get no RAR weights (w_eq = w_if = 0).
RunConfig default_config(std::string_view case_label, loss::Method method);

/// Reduced budget used by the acceptance runs: width 50, depth 3, a 128 x 32
/// training grid (32^2 x 16 in 2D) and 2000 + 2000 epochs.
RunConfig desk_config(std::string_view case_label, loss::Method method);

/// Throws InvalidArgument describing the first bad field.
void validate(const RunConfig& cfg);

std::string config_to_json(const RunConfig& cfg);
/// Missing keys keep the defaults for the file's case and method. Throws
/// ParseError on malformed JSON and InvalidArgument on bad values.
RunConfig config_from_json(const std::string& text);

}  // namespace clinn
