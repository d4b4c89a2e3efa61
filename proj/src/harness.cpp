#include "clinn/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "clinn/cli.hpp"

namespace clinn::harness {

std::size_t MatrixReport::failures() const {
  return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const RunRecord& r) {
    return r.exit_code != 0;
  }));
}

std::filesystem::path run_dir(const std::filesystem::path& out, const std::string& case_label, loss::Method method,
                              std::uint64_t seed) {
  return out / (case_label + "_" + std::string(loss::method_label(method)) + "_s" + std::to_string(seed));
}

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", v);
  return buf;
}

const RunRecord* find(const std::vector<RunRecord>& runs, const std::string& c, loss::Method m, std::uint64_t s) {
  for (const auto& r : runs) {
    if (r.case_label == c && r.method == m && r.seed == s) return &r;
  }
  return nullptr;
}

template <class T>
void push_unique(std::vector<T>& v, const T& x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

}  // namespace

std::string render_markdown(const std::vector<RunRecord>& runs) {
  std::ostringstream s;
  s << "# Experiment matrix\n\n";
  if (runs.empty()) {
    s << "No runs.\n";
    return s.str();
  }
  std::vector<std::string> cases;
  std::vector<loss::Method> methods;
  std::vector<std::uint64_t> seeds;
  for (const auto& r : runs) {
    push_unique(cases, r.case_label);
    push_unique(methods, r.method);
    push_unique(seeds, r.seed);
  }

  for (const auto& c : cases) {
    s << "## Case " << c << "\n\n";
    for (auto seed : seeds) {
      const RunRecord* pinn = find(runs, c, loss::Method::Pinn, seed);
      const bool have_pinn = pinn && pinn->metrics && pinn->metrics->mse_all > 0.0;
      s << "Seed " << seed << "\n\n";
      s << "| method | MSE_T1 | MSE_T2 | MSE_T3 | MSE_T4 | MSE_All | vs pinn |\n";
      s << "|---|---|---|---|---|---|---|\n";
      for (auto m : methods) {
        const RunRecord* r = find(runs, c, m, seed);
        if (!r) continue;
        s << "| " << loss::method_label(m) << " | ";
        if (!r->metrics) {
          s << "failed (exit " << r->exit_code << ") | | | | | |\n";
          continue;
        }
        const auto& x = *r->metrics;
        for (double v : x.mse_t) s << sci(v) << " | ";
        s << sci(x.mse_all) << " | ";
        s << (have_pinn && m != loss::Method::Pinn ? pct(evalreport::improvement_ratio(x.mse_all, pinn->metrics->mse_all))
                                                   : std::string("-"))
          << " |\n";
      }
      s << "\n";
    }
    s << "Median MSE_All over seeds\n\n| method | median | runs |\n|---|---|---|\n";
    for (auto m : methods) {
      std::vector<double> v;
      for (const auto& r : runs) {
        if (r.case_label == c && r.method == m && r.metrics) v.push_back(r.metrics->mse_all);
      }
      s << "| " << loss::method_label(m) << " | " << (v.empty() ? std::string("-") : sci(median(v))) << " | "
        << v.size() << " |\n";
    }
    s << "\n";
  }

  std::vector<const RunRecord*> failed;
  for (const auto& r : runs) {
    if (r.exit_code != 0) failed.push_back(&r);
  }
  s << "## Failures\n\n";
  if (failed.empty()) s << "None.\n";
  for (const auto* r : failed) {
    s << "- " << r->case_label << " " << loss::method_label(r->method) << " seed " << r->seed << ": exit "
      << r->exit_code << ", " << r->message << "\n";
  }
  return s.str();
}

std::string render_json(const std::vector<RunRecord>& runs) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : runs) {
    nlohmann::ordered_json j;
    j["case"] = r.case_label;
    j["method"] = std::string(loss::method_label(r.method));
    j["seed"] = r.seed;
    j["dir"] = r.dir.string();
    j["exit_code"] = r.exit_code;
    if (!r.message.empty()) j["message"] = r.message;
    if (r.metrics) j["metrics"] = nlohmann::ordered_json::parse(evalreport::metrics_to_json(*r.metrics));
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

MatrixReport run_matrix(const MatrixOptions& opt, std::ostream& log) {
  MatrixReport report;
  for (const auto& c : opt.cases) {
    for (auto seed : opt.seeds) {
      for (auto m : opt.methods) {
        RunRecord rec{c, m, seed, run_dir(opt.out, c, m, seed), 0, {}, {}};
        try {
          RunConfig cfg = opt.desk ? desk_config(c, m) : default_config(c, m);
          cfg.seed = seed;
          if (opt.epochs) cfg.epochs = *opt.epochs;
          cfg.out = rec.dir.string();
          auto outcome = cli::train_to_dir(cfg, log);
          rec.exit_code = outcome.exit_code;
          rec.metrics = std::move(outcome.metrics);
        } catch (const NumericalError& e) {
          rec.exit_code = cli::kExitNumerical;
          rec.message = e.what();
        } catch (const InvalidArgument& e) {
          rec.exit_code = cli::kExitUsage;
          rec.message = e.what();
        } catch (const std::exception& e) {
          rec.exit_code = cli::kExitFailure;
          rec.message = e.what();
        }
        if (rec.exit_code != 0) log << "run " << rec.dir.string() << " failed: " << rec.message << "\n";
        report.runs.push_back(std::move(rec));
      }
    }
  }
  report.markdown = render_markdown(report.runs);
  report.json = render_json(report.runs);
  if (!opt.out.empty()) {
    std::filesystem::create_directories(opt.out);
    evalreport::write_text(opt.out / "report.md", report.markdown);
    evalreport::write_text(opt.out / "report.json", report.json);
  }
  return report;
}

}  // namespace clinn::harness
