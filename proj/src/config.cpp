#include "clinn/config.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>
#include <set>

namespace clinn {

std::size_t RunConfig::total_epochs() const { return std::accumulate(epochs.begin(), epochs.end(), std::size_t{0}); }

RunConfig default_config(std::string_view case_label, loss::Method method) {
  RunConfig c;
  const ProblemSpec spec = get_problem(case_label);  // validates the label
  c.case_label = std::string(spec.label());
  c.method = method;
  c.weights = loss::preset_weights(method);
  if (method != loss::Method::Clinn) c.w_eq = c.w_if = 0.0;
  if (spec.dim == 2) {
    c.grid_nx = 128;
    c.grid_nt = 32;
    c.eval_nx = 101;
    c.eval_nt = 51;
  }
  return c;
}

RunConfig desk_config(std::string_view case_label, loss::Method method) {
  RunConfig c = default_config(case_label, method);
  c.width = 50;
  c.depth = 3;
  c.epochs = {2000, 2000};
  if (c.problem().dim == 1) {
    c.grid_nx = 128;
    c.grid_nt = 32;
  } else {
    c.grid_nx = 32;
    c.grid_nt = 16;
  }
  return c;
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& what) { throw InvalidArgument("config: " + what); };
  (void)get_problem(c.case_label);
  if (c.width == 0 || c.depth == 0) fail("width and depth must be positive");
  if (!(c.lr > 0.0) || !std::isfinite(c.lr)) fail("lr must be positive");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0)) fail("betas must lie in [0, 1)");
  if (!(c.eps > 0.0)) fail("eps must be positive");
  if (c.epochs.empty()) fail("epochs needs at least one round");
  if (c.total_epochs() == 0) fail("at least one epoch is required");
  if (c.w_eq < 0.0 || c.w_if < 0.0) fail("RAR weights must be non-negative");
  if (c.grid_nx < 3 || c.grid_nt < 2) fail("training grid needs nx >= 3 and nt >= 2");
  if (c.eval_nx < 2 || c.eval_nt < 2) fail("evaluation grid needs nx >= 2 and nt >= 2");
  if (c.eval_every == 0) fail("eval_every must be positive");
  if (c.h_offset < 0.0) fail("h_offset must be non-negative");
  for (double w : {c.weights.gov, c.weights.ic, c.weights.bc, c.weights.im, c.weights.bd, c.weights.rh}) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail("loss weights must be finite and non-negative");
  }
}

std::string config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["case"] = c.case_label;
  j["method"] = std::string(loss::method_label(c.method));
  j["width"] = c.width;
  j["depth"] = c.depth;
  j["w_gov"] = c.weights.gov;
  j["w_ic"] = c.weights.ic;
  j["w_bc"] = c.weights.bc;
  j["w_im"] = c.weights.im;
  j["w_bd"] = c.weights.bd;
  j["w_rh"] = c.weights.rh;
  j["lr"] = c.lr;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["eps"] = c.eps;
  j["epochs"] = c.epochs;
  j["n_pt"] = c.n_pt;
  j["w_eq"] = c.w_eq;
  j["w_if"] = c.w_if;
  j["grid_nx"] = c.grid_nx;
  j["grid_nt"] = c.grid_nt;
  j["eval_nx"] = c.eval_nx;
  j["eval_nt"] = c.eval_nt;
  j["eval_every"] = c.eval_every;
  j["pd_refresh"] = c.pd_refresh;
  j["seed"] = c.seed;
  j["h_offset"] = c.h_offset;
  j["out"] = c.out;
  return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config JSON: expected an object");

  static const std::set<std::string> known = {
      "case",  "method", "width",  "depth", "w_gov",   "w_ic",    "w_bc",    "w_im",    "w_bd",
      "w_rh",  "lr",     "beta1",  "beta2", "eps",     "epochs",  "n_pt",    "w_eq",    "w_if",
      "grid_nx", "grid_nt", "eval_nx", "eval_nt", "eval_every", "pd_refresh", "seed", "h_offset", "out"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw InvalidArgument("config: unknown key '" + key + "'");
  }

  try {
    const std::string label = j.value("case", std::string("1B"));
    const loss::Method method = loss::parse_method(j.value("method", std::string("clinn")));
    RunConfig c = default_config(label, method);
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get("width", c.width);
    get("depth", c.depth);
    get("w_gov", c.weights.gov);
    get("w_ic", c.weights.ic);
    get("w_bc", c.weights.bc);
    get("w_im", c.weights.im);
    get("w_bd", c.weights.bd);
    get("w_rh", c.weights.rh);
    get("lr", c.lr);
    get("beta1", c.beta1);
    get("beta2", c.beta2);
    get("eps", c.eps);
    get("epochs", c.epochs);
    get("n_pt", c.n_pt);
    get("w_eq", c.w_eq);
    get("w_if", c.w_if);
    get("grid_nx", c.grid_nx);
    get("grid_nt", c.grid_nt);
    get("eval_nx", c.eval_nx);
    get("eval_nt", c.eval_nt);
    get("eval_every", c.eval_every);
    get("pd_refresh", c.pd_refresh);
    get("seed", c.seed);
    get("h_offset", c.h_offset);
    get("out", c.out);
    validate(c);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config JSON: ") + e.what());
  }
}

}  // namespace clinn
