#pragma once

#include <string>
#include <vector>

#include "ccx/profile.hpp"

namespace ccx {

// Relative L2 error in percent: 100 |c - r|_2 / |r|_2 over the date grid.
double e_l2(const std::vector<double>& candidate, const std::vector<double>& reference);
// Relative max error in percent: 100 max|c - r| / max|r|.
double e_linf(const std::vector<double>& candidate, const std::vector<double>& reference);
// Mean absolute difference in basis points of the notional total: 1e4 / (N_T N_total) sum |c - r|, where the
// sum and N_T run over the dates after t = 0 when the grid starts at 0 (both profiles are deterministic there).
double mean_difference(const std::vector<double>& candidate, const std::vector<double>& reference,
                       const std::vector<double>& times, double notional_total);
// Normalised standard error in percent: 100 sqrt(sum SE^2) / sqrt(sum EE^2).
double se_profile(const std::vector<double>& se, const std::vector<double>& reference);

struct ErrorRow {
  std::string case_name, method, measure;  // measure: "EE" or "EPE"
  double e_l2 = 0.0, e_linf = 0.0, md_bp = 0.0;
  double se = 0.0;  // normalised SE of the candidate if sampled, else of the reference; nan if neither
};

// EE and EPE rows of candidate against reference; the time grids must agree to 1e-12.
std::vector<ErrorRow> compare_profiles(const ExposureProfile& candidate, const ExposureProfile& reference,
                                       double notional_total, const std::string& case_name,
                                       const std::string& method);

// CSV with a versioned comment header carrying N_total; columns case,method,measure,e_l2_pct,e_linf_pct,md_bp,se_pct.
void write_error_report(const std::string& path, const std::vector<ErrorRow>& rows, double notional_total);

}  // namespace ccx
