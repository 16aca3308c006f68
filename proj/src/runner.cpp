#include "ccx/runner.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "ccx/anova.hpp"
#include "ccx/error.hpp"
#include "ccx/market.hpp"
#include "ccx/metrics.hpp"

namespace ccx {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::set<std::string> kMethods{"pde-1d", "pde-2d", "pde-3d", "mc", "cv-2d", "cv-3d"};

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

void require(bool ok, const std::string& field, const std::string& msg) {
  if (!ok) throw ConfigError(field + ": " + msg);
}

Scenario load(const RunConfig& cfg) {
  const std::string dir = cfg.data_dir.empty() ? default_data_dir() : cfg.data_dir;
  if (!cfg.portfolio_file.empty()) {
    const std::string model = cfg.model_file.empty() ? (fs::path(dir) / "model.json").string() : cfg.model_file;
    return load_scenario(model, cfg.portfolio_file);
  }
  if (!cfg.model_file.empty()) throw ConfigError("model: a custom market needs a portfolio file");
  return make_case(dir, cfg.case_name);
}

int order_of(const std::string& method) {
  if (method.ends_with("1d")) return 0;
  if (method.ends_with("2d")) return 1;
  return 2;
}

int resolve_base(const FactorSystem& sys, const std::string& name) {
  if (name.empty()) return sys.fx_index(0);
  const int f = sys.find_factor(name);
  if (f < 0) {
    std::string known;
    for (int i = 0; i < sys.dimension(); ++i) known += (known.empty() ? "" : ", ") + sys.factor(i).name;
    throw ConfigError("base-factor: '" + name + "' is not a factor of this portfolio (" + known + ")");
  }
  return f;
}

DecompositionPlan build_plan(const FactorSystem& sys, const Portfolio& pf, const RunConfig& cfg,
                             const std::string& method) {
  DecompositionPlan plan = enumerate_plan(sys.dimension(), {resolve_base(sys, cfg.base_factor)}, order_of(method));
  if (cfg.prune) prune_vanishing(plan, pf);
  return plan;
}

std::string term_file_tag(const FactorSystem& sys, const IndexList& u) {
  std::string s;
  for (int f : u) s += (s.empty() ? "" : "-") + sys.factor(f).code;
  return s.empty() ? "anchor" : s;
}

}  // namespace

std::string RunConfig::resolved_method() const {
  require(kMethods.count(method) > 0, "method",
          "unknown method '" + method + "' (pde-1d, pde-2d, pde-3d, mc, cv-2d, cv-3d)");
  if (cv == 0) return method;
  require(cv == 2 || cv == 3, "cv", "must be 2 or 3");
  const std::string m = "cv-" + std::to_string(cv) + "d";
  require(method == "mc" || method == m, "cv", "conflicts with method '" + method + "'");
  return m;
}

void RunConfig::validate() const {
  const std::string m = resolved_method();
  require(grid_points >= 8, "grid-points", "must be at least 8");
  require(time_steps >= 1, "time-steps", "must be positive");
  require(dates >= 1, "dates", "must be positive");
  require(time_steps % dates == 0, "time-steps", "must be a multiple of the exposure date count (" +
                                                     std::to_string(dates) + ") so dates fall on the PDE grid");
  require(paths >= 2, "paths", "must be at least 2");
  require(mc_steps >= 1, "mc-steps", "must be positive");
  if (m == "mc" || m.starts_with("cv"))
    require(mc_steps % dates == 0, "mc-steps",
            "must be a multiple of the exposure date count (" + std::to_string(dates) + ")");
  require(shared_paths == "global" || shared_paths == "per-term", "shared-paths", "must be 'global' or 'per-term'");
  require(option_pricer == "regression" || option_pricer == "pde", "option-pricer", "must be 'regression' or 'pde'");
  require(regression_paths >= 16, "regression-paths", "must be at least 16");
  require(threads >= 0, "threads", "must be nonnegative");
  require(dump_stride >= 1, "dump-stride", "must be positive");
  require(!dump_surfaces || !out.empty(), "dump-surfaces", "needs an output directory");
  if (portfolio_file.empty()) {
    std::string c = case_name;
    std::transform(c.begin(), c.end(), c.begin(), ::toupper);
    require(c == "A" || c == "B" || c == "C" || c == "D", "case", "unknown case '" + case_name + "' (A, B, C or D)");
  }
}

void RunConfig::set(const std::string& raw_key, const std::string& v) {
  std::string key = raw_key;
  std::replace(key.begin(), key.end(), '_', '-');
  if (key == "data-dir") data_dir = v;
  else if (key == "case") case_name = v;
  else if (key == "model") model_file = v;
  else if (key == "portfolio") portfolio_file = v;
  else if (key == "method") method = v;
  else if (key == "grid-points") grid_points = parse_number<int>(key, v);
  else if (key == "time-steps") time_steps = parse_number<int>(key, v);
  else if (key == "dates") dates = parse_number<int>(key, v);
  else if (key == "paths") paths = parse_number<long>(key, v);
  else if (key == "mc-steps") mc_steps = parse_number<int>(key, v);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, v);
  else if (key == "base-factor") base_factor = v;
  else if (key == "cv") cv = parse_number<int>(key, v);
  else if (key == "shared-paths") shared_paths = v;
  else if (key == "option-pricer") option_pricer = v;
  else if (key == "regression-paths") regression_paths = parse_number<long>(key, v);
  else if (key == "threads") threads = parse_number<int>(key, v);
  else if (key == "prune") prune = parse_bool(key, v);
  else if (key == "out") out = v;
  else if (key == "dump-surfaces") dump_surfaces = parse_bool(key, v);
  else if (key == "dump-stride") dump_stride = parse_number<int>(key, v);
  else if (key == "reference") reference = v;
  else throw ConfigError(raw_key + ": unknown configuration key");
}

std::string explain_run_plan(const RunConfig& cfg) {
  const std::string m = cfg.resolved_method();
  if (m == "mc") throw ConfigError("method: plain Monte Carlo has no decomposition plan");
  Scenario sc = load(cfg);
  return explain_plan(build_plan(*sc.system, *sc.portfolio, cfg, m), *sc.system);
}

RunOutput execute_run(const RunConfig& cfg) {
  const auto t_wall = Clock::now();
  cfg.validate();
  const std::string method = cfg.resolved_method();
  Scenario sc = load(cfg);
  const FactorSystem& sys = *sc.system;
  const Portfolio& pf = *sc.portfolio;
  const int d = sys.dimension();

  RunOutput out;
  out.case_label = sc.name;
  out.method = method;
  out.notional_total = pf.total_notional();
  const auto dates = exposure_dates(pf.horizon(), cfg.dates);

  DecompositionConfig dc;
  dc.grid.m1 = cfg.grid_points;
  dc.solver.steps = cfg.time_steps;
  dc.threads = cfg.threads;

  SurfaceSink sink;
  if (cfg.dump_surfaces) {
    const fs::path dir = fs::path(cfg.out) / "surfaces";
    fs::create_directories(dir);
    sink = [&, dir](const IndexList& u, int i, double t, const MeshND& mesh, const std::vector<double>& mass,
                    const std::vector<double>& values) {
      if (i % cfg.dump_stride != 0) return;
      std::ostringstream name;
      name << term_file_tag(sys, u) << "_d" << std::setw(3) << std::setfill('0') << i << ".csv";
      std::ofstream f(dir / name.str());
      if (!f) throw IoError("cannot write " + (dir / name.str()).string());
      f << "# t: " << std::setprecision(17) << t << "\n";
      for (int f_idx : u) f << sys.factor(f_idx).code << ',';
      f << "mass,value\n";
      std::vector<double> x(mesh.dim());
      for (long n = 0; n < mesh.total(); ++n) {
        mesh.coordinates(n, x.data());
        for (double c : x) f << c << ',';
        f << mass[n] << ',' << values[n] << '\n';
      }
      ++out.surfaces_written;
    };
  }

  std::optional<DecompositionPlan> plan;
  std::optional<DecompositionRun> pde;
  if (method != "mc") {
    plan = build_plan(sys, pf, cfg, method);
    out.plan_text = explain_plan(*plan, sys);
    pde = run_decomposition(sys, pf, plan->terms(), dates, dc, sink);
    double fwd = 0.0, val = 0.0;
    for (const auto& r : pde->results) fwd += r.forward_seconds, val += r.valuation_seconds;
    out.timings.push_back({"option PDE (backward)", pde->option_seconds});
    out.timings.push_back({"forward PDE (sum over terms)", fwd});
    out.timings.push_back({"valuation (sum over terms)", val});
    out.timings.push_back({"decomposition wall", pde->wall_seconds});
  }

  if (method.starts_with("pde")) {
    out.profile = pde->profile;
    out.profile.source = method;
  } else {
    std::vector<SampledTerm> terms;
    if (plan)
      terms = sampled_terms(*plan, cfg.shared_paths == "global" ? SharedPaths::Global : SharedPaths::PerTerm);

    // option values for full and sub-process paths
    std::optional<OptionSurfaceSet> surfaces;
    std::vector<RegressionFit> fits(pf.size());
    std::vector<std::vector<int>> fit_index(pf.size());
    const bool regression = cfg.option_pricer == "regression";
    if (pf.has_options()) {
      std::set<IndexList> sets;
      for (const auto& t : terms)
        if (static_cast<int>(t.factors.size()) < d) sets.insert(t.factors);
      if (!regression) {
        IndexList all(d);
        for (int i = 0; i < d; ++i) all[i] = i;
        sets.insert(all);
      }
      if (!sets.empty()) {
        const auto t0 = Clock::now();
        surfaces.emplace(sys, pf, std::vector<IndexList>(sets.begin(), sets.end()), dates, dc);
        out.timings.push_back({"option PDE for sampled terms", seconds_since(t0)});
      }
      if (regression) {
        const auto t0 = Clock::now();
        for (int k = 0; k < pf.size(); ++k) {
          if (!pf.is_option(k)) continue;
          const auto& opt = std::get<FxOptionContract>(pf.instrument(k));
          SimulationConfig sc_cfg;
          sc_cfg.paths = cfg.regression_paths;
          sc_cfg.steps = cfg.mc_steps;
          sc_cfg.horizon = dates.back();
          sc_cfg.seed = cfg.seed;
          sc_cfg.stream = 0x5245475200000000ULL + static_cast<std::uint64_t>(k);  // disjoint from term streams
          for (double t : dates)
            if (t <= opt.maturity + 1e-12) sc_cfg.times.push_back(t);
          sc_cfg.store = {sys.fx_index(opt.pair), sys.domestic_index(), sys.foreign_rate_index(opt.pair)};
          sc_cfg.threads = cfg.threads;
          auto r = regression_value(simulate_paths(sys, sc_cfg), pf, k);
          if (r.ridge_count > 0)
            out.warnings.push_back("regression for " + pf.label(k) + ": ridge fallback at " +
                                   std::to_string(r.ridge_count) + " dates");
          fits[k] = std::move(r.fit);
          for (double t : dates) fit_index[k].push_back(fits[k].index_of(t));
        }
        out.timings.push_back({"regression (out-of-sample fit)", seconds_since(t0)});
      }
    }
    OptionPricer pricer;
    if (pf.has_options())
      pricer = [&](int k, int date, const double* x, const IndexList& u) {
        if (static_cast<int>(u.size()) == d && regression) {
          const int i = fit_index[k][date];
          return i < 0 ? 0.0 : fits[k].value(i, x);
        }
        return surfaces->value(k, u, date, x);
      };

    ExposureMcConfig mc;
    mc.paths = cfg.paths;
    mc.steps = cfg.mc_steps;
    mc.seed = cfg.seed;
    mc.threads = cfg.threads;
    if (method == "mc") {
      auto r = plain_exposure(pf, dates, mc, pricer);
      out.profile = r.plain;
      out.profile.source = "mc";
      out.timings.push_back({"simulation", r.seconds});
    } else {
      auto r = control_variate_exposure(pf, dates, mc, terms, pde->profile, pricer);
      out.profile = r.cv.profile();
      out.profile.source = method;
      out.plain = r.plain;
      for (const auto& w : r.cv.warnings) out.warnings.push_back(w);
      out.cv = std::move(r.cv);
      out.timings.push_back({"simulation (full and sub-process paths)", r.seconds});
    }
  }
  out.timings.push_back({"total", seconds_since(t_wall)});
  return out;
}

void write_run_artifacts(const RunOutput& run, const RunConfig& cfg, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);
  write_profile((base / "profile.csv").string(), run.profile);
  if (!run.plan_text.empty()) {
    std::ofstream f(base / "plan.txt");
    f << run.plan_text;
    if (!f) throw IoError("cannot write plan.txt in " + dir);
  }
  if (run.plain) write_profile((base / "profile_plain.csv").string(), *run.plain);
  if (run.cv) {
    const auto& c = *run.cv;
    std::ofstream f(base / "cv.csv");
    f << "# ccx control variate diagnostics v1\n"
      << "t,alpha_EE,var_plain_EE,var_cv_EE,ratio_EE,approx_ratio_EE,sampled_EE,"
         "alpha_EPE,var_plain_EPE,var_cv_EPE,ratio_EPE,approx_ratio_EPE,sampled_EPE\n"
      << std::setprecision(17);
    for (size_t i = 0; i < c.times.size(); ++i)
      f << c.times[i] << ',' << c.alpha_ee[i] << ',' << c.var_plain_ee[i] << ',' << c.var_cv_ee[i] << ','
        << c.ratio_ee[i] << ',' << c.approx_ratio_ee[i] << ',' << c.sampled_ee[i] << ',' << c.alpha_epe[i] << ','
        << c.var_plain_epe[i] << ',' << c.var_cv_epe[i] << ',' << c.ratio_epe[i] << ',' << c.approx_ratio_epe[i]
        << ',' << c.sampled_epe[i] << '\n';
    if (!f) throw IoError("cannot write cv.csv in " + dir);
  }
  if (!cfg.reference.empty()) {
    auto rows = compare_profiles(run.profile, read_profile(cfg.reference), run.notional_total, run.case_label,
                                 run.method);
    write_error_report((base / "errors.csv").string(), rows, run.notional_total);
  }
  std::ofstream s(base / "summary.txt");
  s << "# ccx run summary v1\n"
    << "case: " << run.case_label << "\nmethod: " << run.method << "\n"
    << "grid_points: " << cfg.grid_points << "\ntime_steps: " << cfg.time_steps << "\ndates: " << cfg.dates << "\n";
  if (run.method == "mc" || run.method.starts_with("cv"))
    s << "paths: " << cfg.paths << "\nmc_steps: " << cfg.mc_steps << "\nseed: " << cfg.seed << "\n";
  if (run.method.starts_with("cv")) s << "shared_paths: " << cfg.shared_paths << "\n";
  s << "base_factor: " << (cfg.base_factor.empty() ? "(first pair)" : cfg.base_factor) << "\n"
    << "notional_total: " << run.notional_total << "\n";
  if (run.cv)
    s << "variance_reduction_EE: " << run.cv->reduction_factor_ee() << "\n"
      << "variance_reduction_EPE: " << run.cv->reduction_factor_epe() << "\n";
  if (run.surfaces_written > 0) s << "surfaces_written: " << run.surfaces_written << "\n";
  s << "\nstage timings (seconds, wall clock):\n" << std::fixed << std::setprecision(3);
  for (const auto& t : run.timings) s << "  " << t.stage << ": " << t.seconds << "\n";
  for (const auto& w : run.warnings) s << "warning: " << w << "\n";
  if (!s) throw IoError("cannot write summary.txt in " + dir);
}

void compare_profile_files(const std::string& candidate, const std::string& reference, double notional_total,
                           const std::string& case_name, const std::string& method, const std::string& out_csv) {
  auto rows = compare_profiles(read_profile(candidate), read_profile(reference), notional_total, case_name, method);
  write_error_report(out_csv, rows, notional_total);
}

}  // namespace ccx
