// ccx command-line runner: thin front end over the C API.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ccx/ccx.h"

namespace fs = std::filesystem;

namespace {

struct Failure {
  int code;
};

void check(ccx_status s) {
  if (s == CCX_OK) return;
  std::cerr << "error: " << ccx_last_error() << "\n";
  throw Failure{s == CCX_ERR_CONFIG || s == CCX_ERR_INVALID_ARGUMENT ? 2 : 1};
}

class ConfigHandle {
 public:
  ConfigHandle() { check(ccx_config_create(&h_)); }
  ~ConfigHandle() { ccx_config_destroy(h_); }
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;
  void set(const std::string& k, const std::string& v) { check(ccx_config_set(h_, k.c_str(), v.c_str())); }
  const ccx_config* get() const { return h_; }

 private:
  ccx_config* h_ = nullptr;
};

// "key: value" lines of a run's summary.txt.
std::map<std::string, std::string> read_summary(const fs::path& dir) {
  std::map<std::string, std::string> kv;
  std::ifstream in(dir / "summary.txt");
  std::string line;
  while (std::getline(in, line)) {
    auto p = line.find(": ");
    if (p != std::string::npos && line[0] != '#' && line[0] != ' ') kv[line.substr(0, p)] = line.substr(p + 2);
  }
  return kv;
}

fs::path profile_of(const std::string& arg) {
  fs::path p(arg);
  return fs::is_directory(p) ? p / "profile.csv" : p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exposure profiles of FX/rates portfolios by PDE decomposition, Monte Carlo and control variates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ccx_version()));

  // run
  auto* run = app.add_subcommand("run", "Run one case and write profile.csv, summary.txt and related artifacts");
  std::map<std::string, std::string> opts;
  auto add = [&](const std::string& flag, const std::string& key, const std::string& help) {
    run->add_option_function<std::string>(flag, [&opts, key](const std::string& v) { opts[key] = v; }, help);
  };
  add("--case", "case", "Preset portfolio A, B, C or D (default A)");
  add("--portfolio", "portfolio", "Custom portfolio JSON (overrides --case)");
  add("--model", "model", "Market model JSON for a custom portfolio");
  add("--data-dir", "data-dir", "Directory of the bundled market fixtures");
  add("--method", "method", "pde-1d, pde-2d, pde-3d, mc, cv-2d or cv-3d (default pde-2d)");
  add("--grid-points", "grid-points", "PDE grid points m1 on the FX axis (default 60)");
  add("--time-steps", "time-steps", "PDE time steps over the horizon (default 500)");
  add("--dates", "dates", "Exposure dates after t = 0 (default 100)");
  add("--paths", "paths", "Monte Carlo paths (default 10000)");
  add("--mc-steps", "mc-steps", "Euler steps over the horizon (default 1000)");
  add("--seed", "seed", "Random seed (default 1)");
  add("--base-factor", "base-factor", "Base factor of the decomposition: pair name or factor code");
  add("--cv", "cv", "With --method mc: control variate of dimension 2 or 3");
  add("--shared-paths", "shared-paths", "Sub-process noise: global or per-term (default global)");
  add("--option-pricer", "option-pricer", "FX options on full paths: regression or pde (default regression)");
  add("--regression-paths", "regression-paths", "Paths of the regression fit (default 20000)");
  add("--threads", "threads", "Worker threads, 0 = all cores (default 0)");
  add("--reference", "reference", "Reference profile.csv or run directory; writes errors.csv");
  add("--dump-stride", "dump-stride", "Dump every n-th exposure date (default 10)");
  std::string out_dir;
  bool explain = false, dump = false, no_prune = false;
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--explain-plan", explain, "Print the decomposition plan and exit without solving");
  run->add_flag("--dump-surfaces", dump, "Write per-term density and value surfaces under <out>/surfaces");
  run->add_flag("--no-prune", no_prune, "Keep structurally vanishing surpluses");

  // compare
  auto* cmp = app.add_subcommand("compare", "Error metrics of a candidate run against a reference run");
  std::string cand, ref, errors_out, case_label, method_label;
  double notional = 0.0;
  cmp->add_option("candidate", cand, "Candidate run directory or profile.csv")->required();
  cmp->add_option("reference", ref, "Reference run directory or profile.csv")->required();
  cmp->add_option("--out", errors_out, "Output CSV (default errors.csv next to the candidate)");
  cmp->add_option("--notional-total", notional, "Notional total for MD (default: from the candidate summary)");
  cmp->add_option("--case", case_label, "Case label (default: from the candidate summary)");
  cmp->add_option("--method", method_label, "Method label (default: from the candidate summary)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ConfigHandle cfg;
      for (const auto& [k, v] : opts) {
        if (k == "reference")
          cfg.set(k, profile_of(v).string());
        else
          cfg.set(k, v);
      }
      if (!out_dir.empty()) cfg.set("out", out_dir);
      if (dump) cfg.set("dump-surfaces", "true");
      if (no_prune) cfg.set("prune", "false");
      if (explain) {
        size_t need = 0;
        check(ccx_explain_plan(cfg.get(), nullptr, 0, &need));
        std::string text(need, '\0');
        check(ccx_explain_plan(cfg.get(), text.data(), text.size(), nullptr));
        text.resize(need - 1);
        std::cout << text;
        if (!out_dir.empty()) {
          fs::create_directories(out_dir);
          std::ofstream(fs::path(out_dir) / "plan.txt") << text;
        }
        return 0;
      }
      if (out_dir.empty()) {
        std::cerr << "error: out: an output directory is required (--out)\n";
        return 2;
      }
      check(ccx_config_validate(cfg.get()));
      ccx_run* handle = nullptr;
      check(ccx_run_execute(cfg.get(), &handle));
      std::unique_ptr<ccx_run, void (*)(ccx_run*)> guard(handle, ccx_run_destroy);
      check(ccx_run_write(handle, out_dir.c_str()));
      double seconds = 0.0;
      check(ccx_run_scalar(handle, "seconds", &seconds));
      std::cout << "wrote " << out_dir << " (" << seconds << " s)\n";
      double red = 0.0;
      if (ccx_run_scalar(handle, "reduction_ee", &red) == CCX_OK) {
        double red_epe = 0.0;
        check(ccx_run_scalar(handle, "reduction_epe", &red_epe));
        std::cout << "variance reduction: EE " << red << ", EPE " << red_epe << "\n";
      }
      return 0;
    }
    // compare
    const fs::path cand_profile = profile_of(cand), ref_profile = profile_of(ref);
    const auto summary = fs::is_directory(cand) ? read_summary(cand) : std::map<std::string, std::string>{};
    auto from_summary = [&](const std::string& given, const char* key) {
      if (!given.empty()) return given;
      auto it = summary.find(key);
      return it == summary.end() ? std::string() : it->second;
    };
    if (notional <= 0.0) {
      auto it = summary.find("notional_total");
      if (it == summary.end()) {
        std::cerr << "error: notional-total: not given and no summary.txt next to the candidate\n";
        return 2;
      }
      notional = std::stod(it->second);
    }
    if (errors_out.empty())
      errors_out = ((fs::is_directory(cand) ? fs::path(cand) : cand_profile.parent_path()) / "errors.csv").string();
    check(ccx_compare_files(cand_profile.c_str(), ref_profile.c_str(), notional,
                            from_summary(case_label, "case").c_str(), from_summary(method_label, "method").c_str(),
                            errors_out.c_str()));
    std::cout << "wrote " << errors_out << "\n";
    return 0;
  } catch (const Failure& f) {
    return f.code;
  }
}
