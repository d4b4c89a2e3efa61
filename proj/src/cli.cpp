#include "clinn/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "clinn/harness.hpp"
#include "clinn/kernels.hpp"
#include "clinn/oracle.hpp"
#include "clinn/shockgeom.hpp"
#include "clinn/trainer.hpp"

namespace clinn::cli {

namespace fs = std::filesystem;

TrainOutcome train_to_dir(const RunConfig& cfg, std::ostream& log) {
  TrainOutcome outcome;
  validate(cfg);
  if (cfg.out.empty()) throw InvalidArgument("train: an output directory is required");
  const fs::path dir = cfg.out;
  fs::create_directories(dir);
  evalreport::write_text(dir / "config.json", config_to_json(cfg));

  const std::string tag = cfg.case_label + "/" + std::string(loss::method_label(cfg.method));
  auto progress = [&](const trainer::EpochRecord& r) {
    if (!r.eval_mse) return;
    char line[160];
    std::snprintf(line, sizeof line, "[%s] epoch %zu  loss %.4e  eval mse %.4e\n", tag.c_str(), r.epoch + 1,
                  r.total, *r.eval_mse);
    log << line << std::flush;
  };

  trainer::TrainResult result = [&] {
    try {
      return trainer::train(cfg, progress);
    } catch (const trainer::DivergenceError& e) {
      evalreport::write_text(dir / "history.csv", trainer::history_csv(e.partial().history));
      evalreport::write_text(dir / "timing.csv", trainer::timing_csv(e.partial().epoch_ms));
      throw;
    }
  }();

  save_params(result.best, dir / "checkpoint.bin");
  evalreport::write_text(dir / "history.csv", trainer::history_csv(result.history));
  evalreport::write_text(dir / "timing.csv", trainer::timing_csv(result.epoch_ms));

  const ProblemSpec spec = cfg.problem();
  const auto grid = evalreport::make_eval_grid(spec, cfg.eval_nx, cfg.eval_nt);
  auto m = evalreport::compute_metrics(spec, std::string(loss::method_label(cfg.method)), grid,
                                       evalreport::predict(result.best, grid));
  evalreport::write_metrics(m, dir / "metrics.json");
  outcome.metrics = std::move(m);
  return outcome;
}

namespace {

std::vector<std::size_t> parse_epochs(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("--epochs: not a number: '" + item + "'");
    }
    if (used != item.size() || v < 0) throw InvalidArgument("--epochs: bad entry '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw InvalidArgument("--epochs: empty list");
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw InvalidArgument("cannot read " + p.string());
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

/// Options shared by the subcommands that describe a run.
struct RunFlags {
  std::string case_label;
  std::string method;
  std::string config;
  std::string epochs;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t width = 0, depth = 0, rar = 0, pd_refresh = 0, npt = 0, grid_nx = 0, grid_nt = 0, eval_nx = 0, eval_nt = 0;
  double weq = 0, wif = 0, lr = 0, h_offset = 0;
  bool desk = false;
  std::string checkpoint;

  CLI::Option *o_case{}, *o_method{}, *o_seed{}, *o_width{}, *o_depth{}, *o_epochs{}, *o_rar{}, *o_npt{},
      *o_weq{}, *o_wif{}, *o_lr{}, *o_gnx{}, *o_gnt{}, *o_enx{}, *o_ent{}, *o_h{}, *o_out{}, *o_config{}, *o_pdr{};

  void add_shape(CLI::App* app) {
    o_case = app->add_option("--case", case_label, "Problem case (1A 1B 2A 2B 3A 3B 2D)");
    o_method = app->add_option("--method", method, "Loss preset (clinn ifnn pinnwe pinn)");
    o_width = app->add_option("--width", width, "Hidden width");
    o_depth = app->add_option("--depth", depth, "Residual blocks");
  }
  void add_training(CLI::App* app) {
    o_seed = app->add_option("--seed", seed, "Initialisation seed");
    o_epochs = app->add_option("--epochs", epochs, "Epochs per round, comma separated");
    o_rar = app->add_option("--rar", rar, "Number of RAR refreshes (rounds - 1)");
    o_npt = app->add_option("--npt", npt, "Points reweighted per list");
    o_weq = app->add_option("--weq", weq, "Weight added for the governing-equation list");
    o_wif = app->add_option("--wif", wif, "Weight added for the implicit-form list");
    o_lr = app->add_option("--lr", lr, "Adam learning rate");
    o_gnx = app->add_option("--grid-nx", grid_nx, "Training grid points per space axis");
    o_gnt = app->add_option("--grid-nt", grid_nt, "Training grid time levels");
    o_h = app->add_option("--h-offset", h_offset, "Jump side offset (0: two grid spacings)");
    o_pdr = app->add_option("--pd-refresh", pd_refresh, "Epochs between discontinuity-set rebuilds (0: per round)");
    o_config = app->add_option("--config", config, "JSON config; flags override it");
    app->add_flag("--desk", desk, "Start from the reduced desk-scale preset");
  }
  void add_eval(CLI::App* app) {
    o_enx = app->add_option("--eval-nx", eval_nx, "Evaluation grid points per space axis");
    o_ent = app->add_option("--eval-nt", eval_nt, "Evaluation grid time levels");
  }

  RunConfig build() const {
    RunConfig c;
    if (o_config && o_config->count()) {
      c = config_from_json(read_file(config));
      if (o_case->count()) c.case_label = std::string(get_problem(case_label).label());
      if (o_method->count()) c.method = loss::parse_method(method);
    } else {
      const std::string cl = o_case->count() ? case_label : "1B";
      const loss::Method m = o_method->count() ? loss::parse_method(method) : loss::Method::Clinn;
      c = desk ? desk_config(cl, m) : default_config(cl, m);
    }
    auto set = [](CLI::Option* o, auto& field, const auto& value) {
      if (o && o->count()) field = value;
    };
    set(o_seed, c.seed, seed);
    set(o_width, c.width, width);
    set(o_depth, c.depth, depth);
    if (o_epochs && o_epochs->count()) c.epochs = parse_epochs(epochs);
    if (o_rar && o_rar->count()) {
      if (c.epochs.size() == 1 || !o_epochs->count()) c.epochs.assign(rar + 1, c.epochs.front());
      if (c.epochs.size() != rar + 1) throw InvalidArgument("--rar does not match the --epochs list length");
    }
    set(o_npt, c.n_pt, npt);
    set(o_weq, c.w_eq, weq);
    set(o_wif, c.w_if, wif);
    set(o_lr, c.lr, lr);
    set(o_gnx, c.grid_nx, grid_nx);
    set(o_gnt, c.grid_nt, grid_nt);
    set(o_enx, c.eval_nx, eval_nx);
    set(o_ent, c.eval_nt, eval_nt);
    set(o_h, c.h_offset, h_offset);
    set(o_pdr, c.pd_refresh, pd_refresh);
    set(o_out, c.out, out);
    validate(c);
    return c;
  }
};

/// Solution values on a training grid: a checkpoint's prediction, or the
/// exact solution when no checkpoint is given.
std::vector<double> field_on(const ProblemSpec& spec, const CollocationSet& grid, const RunFlags& f) {
  if (f.checkpoint.empty()) {
    std::vector<double> u(grid.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
      const auto p = grid.point(j);
      u[j] = oracle::exact(spec, p.first(spec.dim), p[spec.dim]);
    }
    return u;
  }
  if (!fs::exists(f.checkpoint)) throw InvalidArgument("checkpoint not found: " + f.checkpoint);
  std::optional<Architecture> want;
  if (f.o_width->count() || f.o_depth->count()) {
    want = Architecture{f.o_width->count() ? f.width : 100, f.o_depth->count() ? f.depth : 5, spec.input_dim()};
  }
  const NetworkParams params = load_params(f.checkpoint, want);
  if (params.arch().input_dim != spec.input_dim()) {
    throw ShapeMismatch("checkpoint input size " + std::to_string(params.arch().input_dim) + " does not fit case " +
                        std::string(spec.label()));
  }
  return kernels::evaluate(params, kernels::PointBatch{grid.coords, grid.input_dim()}, false).u;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int cmd_train(const RunFlags& f, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = f.build();
  const auto r = train_to_dir(cfg, err);
  out << evalreport::metrics_to_json(*r.metrics);
  return kExitOk;
}

int cmd_eval(const RunFlags& f, bool export_files, std::ostream& out) {
  if (f.checkpoint.empty()) throw InvalidArgument("eval: --checkpoint is required");
  if (!fs::exists(f.checkpoint)) throw InvalidArgument("checkpoint not found: " + f.checkpoint);
  const ProblemSpec spec = get_problem(f.o_case->count() ? f.case_label : "1B");
  const std::string method = f.o_method->count() ? std::string(loss::method_label(loss::parse_method(f.method)))
                                                 : std::string("unknown");
  std::optional<Architecture> want;
  if (f.o_width->count() || f.o_depth->count()) {
    want = Architecture{f.o_width->count() ? f.width : 100, f.o_depth->count() ? f.depth : 5, spec.input_dim()};
  }
  const NetworkParams params = load_params(f.checkpoint, want);
  if (params.arch().input_dim != spec.input_dim()) {
    throw ShapeMismatch("checkpoint input size does not fit case " + std::string(spec.label()));
  }
  const RunConfig base = default_config(spec.label(), loss::Method::Clinn);
  const std::size_t nx = f.o_enx->count() ? f.eval_nx : base.eval_nx;
  const std::size_t nt = f.o_ent->count() ? f.eval_nt : base.eval_nt;
  if (nx < 2 || nt < 2) throw InvalidArgument("eval grid needs at least 2 x 2 nodes");
  const auto grid = evalreport::make_eval_grid(spec, nx, nt);
  const auto pred = evalreport::predict(params, grid);
  const auto m = evalreport::compute_metrics(spec, method, grid, pred);
  if (!f.out.empty()) {
    fs::create_directories(f.out);
    evalreport::write_metrics(m, fs::path(f.out) / "metrics.json");
    if (export_files) evalreport::export_prediction(spec, grid, pred, f.out);
  }
  out << evalreport::metrics_to_json(m);
  return kExitOk;
}

int cmd_indicate(const RunFlags& f, std::ostream& out) {
  const ProblemSpec spec = get_problem(f.o_case->count() ? f.case_label : "1B");
  const RunConfig base = default_config(spec.label(), loss::Method::Clinn);
  const auto grid = sample_grid(spec, f.o_gnx->count() ? f.grid_nx : base.grid_nx,
                                f.o_gnt->count() ? f.grid_nt : base.grid_nt);
  const auto u = field_on(spec, grid, f);
  const auto slices = shockgeom::flag_slices(spec, grid, u);
  const auto pd = shockgeom::build_pd(grid, slices);

  std::ostringstream csv;
  csv << (spec.dim == 1 ? "t,x,an_out\n" : "t,x,y,an_out\n");
  const std::size_t per = grid.size() / grid.nt;
  for (std::size_t j : pd) {
    const auto p = grid.point(j);
    const std::size_t k = j / per, cell = j % per;
    csv << num(p[spec.dim]) << ',' << num(p[0]) << ',';
    if (spec.dim == 2) csv << num(p[1]) << ',';
    csv << num(slices[k].out[cell]) << '\n';
  }
  if (!f.out.empty()) {
    fs::create_directories(f.out);
    evalreport::write_text(fs::path(f.out) / "indicator.csv", csv.str());
  } else {
    out << csv.str();
  }
  out << "flagged " << pd.size() << " of " << grid.interior.size() << " interior points on " << grid.nt
      << " time levels\n";
  return kExitOk;
}

int cmd_shocks(const RunFlags& f, std::ostream& out) {
  const ProblemSpec spec = get_problem(f.o_case->count() ? f.case_label : "1B");
  const RunConfig base = default_config(spec.label(), loss::Method::Clinn);
  const auto grid = sample_grid(spec, f.o_gnx->count() ? f.grid_nx : base.grid_nx,
                                f.o_gnt->count() ? f.grid_nt : base.grid_nt);
  const auto u = field_on(spec, grid, f);
  const auto slices = shockgeom::flag_slices(spec, grid, u);
  const auto pd = shockgeom::build_pd(grid, slices);
  const double vmax = shockgeom::max_characteristic_speed(spec);

  std::ostringstream csv;
  std::size_t rows = 0;
  if (spec.dim == 1) {
    const auto curves = shockgeom::fit_curves(shockgeom::group_slices(grid, pd),
                                              {.cell = grid.spacing(), .max_speed = vmax});
    csv << "track_id,t,x,s\n";
    for (std::size_t id = 0; id < curves.size(); ++id) {
      const auto& c = curves[id];
      for (std::size_t i = 0; i < c.t.size(); ++i, ++rows) {
        csv << id << ',' << num(c.t[i]) << ',' << num(c.x[i]) << ',' << (c.has_speed() ? num(c.s[i]) : "") << '\n';
      }
    }
    out << curves.size() << " shock tracks, " << rows << " samples\n";
  } else {
    const double h = f.o_h->count() && f.h_offset > 0 ? f.h_offset : 2.0 * grid.spacing();
    const auto targets = shockgeom::rh_targets_2d(spec, grid, slices, pd, h, vmax);
    csv << "t,x,y,n_x,n_y,s\n";
    for (const auto& t : targets) {
      const auto p = grid.point(t.point);
      csv << num(p[2]) << ',' << num(p[0]) << ',' << num(p[1]) << ',' << num(t.normal[0]) << ','
          << num(t.normal[1]) << ',' << num(t.s) << '\n';
      ++rows;
    }
    out << rows << " front samples\n";
  }
  if (!f.out.empty()) {
    fs::create_directories(f.out);
    evalreport::write_text(fs::path(f.out) / "shocks.csv", csv.str());
  } else {
    out << csv.str();
  }
  return kExitOk;
}

int cmd_compare(const std::vector<std::string>& files, std::ostream& out) {
  if (files.empty()) throw InvalidArgument("compare: give at least one metrics.json");
  std::vector<evalreport::MetricsRecord> recs;
  for (const auto& p : files) {
    if (!fs::exists(p)) throw InvalidArgument("metrics file not found: " + p);
    recs.push_back(evalreport::read_metrics(p));
  }
  out << evalreport::compare_table(recs);
  return kExitOk;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_matrix(const std::string& cases, const std::string& methods, const std::string& seeds,
               const RunFlags& f, bool full, std::ostream& out, std::ostream& err) {
  harness::MatrixOptions opt;
  opt.cases = split(cases);
  for (const auto& c : opt.cases) (void)get_problem(c);
  for (const auto& m : split(methods)) opt.methods.push_back(loss::parse_method(m));
  opt.seeds.clear();
  for (const auto& s : split(seeds)) opt.seeds.push_back(std::stoull(s));
  opt.desk = !full;
  if (f.o_epochs->count()) opt.epochs = parse_epochs(f.epochs);
  if (f.out.empty()) throw InvalidArgument("matrix: --out is required");
  opt.out = f.out;
  const auto report = harness::run_matrix(opt, err);
  out << report.markdown;
  return report.failures() == 0 ? kExitOk : kExitNumerical;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conservation-law-informed neural network workbench"};
  app.require_subcommand(1);

  RunFlags tf, ef, inf, sf, mf;
  auto* train = app.add_subcommand("train", "Train one configuration");
  tf.add_shape(train);
  tf.add_training(train);
  tf.add_eval(train);
  tf.o_out = train->add_option("--out", tf.out, "Output directory")->required();

  auto* eval = app.add_subcommand("eval", "Score a checkpoint against the exact solution");
  ef.add_shape(eval);
  ef.add_eval(eval);
  eval->add_option("--checkpoint", ef.checkpoint, "Checkpoint file")->required();
  ef.o_out = eval->add_option("--out", ef.out, "Directory for metrics and plots");
  bool no_export = false;
  eval->add_flag("--no-export", no_export, "Only write metrics.json");

  auto* ind = app.add_subcommand("indicate", "Flag discontinuity points on a training grid");
  inf.add_shape(ind);
  inf.add_training(ind);
  ind->add_option("--checkpoint", inf.checkpoint, "Checkpoint (default: exact solution)");
  inf.o_out = ind->add_option("--out", inf.out, "Output directory");

  auto* shk = app.add_subcommand("shocks", "Fit shock tracks from indicator flags");
  sf.add_shape(shk);
  sf.add_training(shk);
  shk->add_option("--checkpoint", sf.checkpoint, "Checkpoint (default: exact solution)");
  sf.o_out = shk->add_option("--out", sf.out, "Output directory");

  auto* cmp = app.add_subcommand("compare", "Tabulate metrics files of one case");
  std::vector<std::string> files;
  cmp->add_option("files", files, "metrics.json files")->required();

  auto* mat = app.add_subcommand("matrix", "Run a case x method x seed experiment matrix");
  std::string m_cases, m_methods = "clinn,ifnn,pinnwe,pinn", m_seeds = "7,11,13";
  bool full = false;
  mat->add_option("--cases", m_cases, "Comma-separated cases")->required();
  mat->add_option("--methods", m_methods, "Comma-separated presets");
  mat->add_option("--seeds", m_seeds, "Comma-separated seeds");
  mf.o_epochs = mat->add_option("--epochs", mf.epochs, "Epochs per round, comma separated");
  mat->add_flag("--full", full, "Full-scale settings instead of the desk preset");
  mf.o_out = mat->add_option("--out", mf.out, "Report directory")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*train) return cmd_train(tf, out, err);
    if (*eval) return cmd_eval(ef, !no_export, out);
    if (*ind) return cmd_indicate(inf, out);
    if (*shk) return cmd_shocks(sf, out);
    if (*cmp) return cmd_compare(files, out);
    if (*mat) return cmd_matrix(m_cases, m_methods, m_seeds, mf, full, out, err);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ShapeMismatch& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace clinn::cli
