#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccx/montecarlo.hpp"
#include "ccx/profile.hpp"

namespace ccx {

// Run configuration; every field has a usable default so a preset case runs with no other input.
struct RunConfig {
  std::string data_dir;        // bundled fixtures when empty
  std::string case_name = "A"; // A-D; ignored when portfolio_file is set
  std::string model_file;      // custom market (defaults to data_dir/model.json)
  std::string portfolio_file;  // custom portfolio
  std::string method = "pde-2d";  // pde-1d, pde-2d, pde-3d, mc, cv-2d, cv-3d
  int grid_points = 60;           // m1
  int time_steps = 500;           // PDE steps over the portfolio horizon
  int dates = 100;                // exposure dates after t = 0
  long paths = 10000;
  int mc_steps = 1000;            // Euler steps over the portfolio horizon
  std::uint64_t seed = 1;
  std::string base_factor;        // pair name or factor code; first pair's FX rate when empty
  int cv = 0;                     // with method mc: 2 or 3 selects cv-2d / cv-3d
  std::string shared_paths = "global";   // global or per-term
  std::string option_pricer = "regression";  // full-path FX options: regression or pde
  long regression_paths = 20000;  // stored paths for the regression fit
  int threads = 0;                // 0 = hardware concurrency
  bool prune = true;
  std::string out;                // output directory (artifacts and surface dumps)
  bool dump_surfaces = false;     // per-term density and value surfaces under out/surfaces
  int dump_stride = 10;           // every n-th exposure date
  std::string reference;          // reference profile.csv for errors.csv

  // Resolved method (applies cv) or ConfigError with the offending field.
  std::string resolved_method() const;
  void validate() const;
  // Sets a field from its command-line spelling (e.g. "grid-points" or "grid_points"); ConfigError on bad values.
  void set(const std::string& key, const std::string& value);
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunOutput {
  std::string case_label, method;
  double notional_total = 0.0;
  ExposureProfile profile;
  std::optional<ExposureProfile> plain;  // plain MC on the same paths for cv runs
  std::optional<CvEstimate> cv;
  std::string plan_text;                 // empty for plain MC
  std::vector<StageTiming> timings;
  std::vector<std::string> warnings;
  int surfaces_written = 0;
};

// Plan description only (no solves) for the configured case, method and base factor.
std::string explain_run_plan(const RunConfig& cfg);

// Executes the configured pipeline. Surface dumps (if requested) go to cfg.out/surfaces.
RunOutput execute_run(const RunConfig& cfg);

// Writes profile.csv, summary.txt, plan.txt (decomposition methods), cv.csv and profile_plain.csv (cv methods) and
// errors.csv (when cfg.reference is set) into dir.
void write_run_artifacts(const RunOutput& run, const RunConfig& cfg, const std::string& dir);

// errors.csv of candidate against reference profile files.
void compare_profile_files(const std::string& candidate, const std::string& reference, double notional_total,
                           const std::string& case_name, const std::string& method, const std::string& out_csv);

}  // namespace ccx
