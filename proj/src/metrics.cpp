#include "ccx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "ccx/error.hpp"

namespace ccx {

namespace {

void check_lengths(const std::vector<double>& a, const std::vector<double>& b, const char* what) {
  if (a.size() != b.size() || a.empty())
    throw InvalidArgument(std::string(what) + ": profiles must be non-empty and of equal length (" +
                          std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

double relative(double num, double den, const char* what) {
  if (num == 0.0) return 0.0;
  if (!(den > 0.0)) throw InvalidArgument(std::string(what) + ": reference profile is identically zero");
  return 100.0 * num / den;
}

}  // namespace

double e_l2(const std::vector<double>& candidate, const std::vector<double>& reference) {
  check_lengths(candidate, reference, "e_l2");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    const double d = candidate[i] - reference[i];
    num += d * d;
    den += reference[i] * reference[i];
  }
  return relative(std::sqrt(num), std::sqrt(den), "e_l2");
}

double e_linf(const std::vector<double>& candidate, const std::vector<double>& reference) {
  check_lengths(candidate, reference, "e_linf");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    num = std::max(num, std::abs(candidate[i] - reference[i]));
    den = std::max(den, std::abs(reference[i]));
  }
  return relative(num, den, "e_linf");
}

double mean_difference(const std::vector<double>& candidate, const std::vector<double>& reference,
                       const std::vector<double>& times, double notional_total) {
  check_lengths(candidate, reference, "mean_difference");
  check_lengths(times, reference, "mean_difference");
  if (!(notional_total > 0.0)) throw InvalidArgument("mean_difference: notional total must be positive");
  const size_t first = times.front() == 0.0 && times.size() > 1 ? 1 : 0;
  double sum = 0.0;
  for (size_t i = first; i < times.size(); ++i) sum += std::abs(candidate[i] - reference[i]);
  return 1e4 * sum / (static_cast<double>(times.size() - first) * notional_total);
}

double se_profile(const std::vector<double>& se, const std::vector<double>& reference) {
  check_lengths(se, reference, "se_profile");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < se.size(); ++i) {
    if (se[i] < 0.0) throw InvalidArgument("se_profile: negative standard error");
    num += se[i] * se[i];
    den += reference[i] * reference[i];
  }
  return relative(std::sqrt(num), std::sqrt(den), "se_profile");
}

std::vector<ErrorRow> compare_profiles(const ExposureProfile& candidate, const ExposureProfile& reference,
                                       double notional_total, const std::string& case_name,
                                       const std::string& method) {
  if (candidate.size() != reference.size())
    throw InvalidArgument("compare: time grids differ in length (" + std::to_string(candidate.size()) + " vs " +
                          std::to_string(reference.size()) + ")");
  for (int i = 0; i < reference.size(); ++i)
    if (std::abs(candidate.times[i] - reference.times[i]) > 1e-12)
      throw InvalidArgument("compare: time grids differ at index " + std::to_string(i));
  std::vector<ErrorRow> rows;
  for (bool ee : {true, false}) {
    const auto& c = ee ? candidate.ee : candidate.epe;
    const auto& r = ee ? reference.ee : reference.epe;
    ErrorRow row;
    row.case_name = case_name;
    row.method = method;
    row.measure = ee ? "EE" : "EPE";
    row.e_l2 = e_l2(c, r);
    row.e_linf = e_linf(c, r);
    row.md_bp = mean_difference(c, r, reference.times, notional_total);
    const ExposureProfile* sampled = candidate.has_se() ? &candidate : reference.has_se() ? &reference : nullptr;
    row.se = sampled ? se_profile(ee ? sampled->se_ee : sampled->se_epe, r)
                     : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

void write_error_report(const std::string& path, const std::vector<ErrorRow>& rows, double notional_total) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "# ccx error report v1\n# N_total: " << std::setprecision(17) << notional_total
      << "\ncase,method,measure,e_l2_pct,e_linf_pct,md_bp,se_pct\n";
  for (const auto& r : rows)
    out << r.case_name << ',' << r.method << ',' << r.measure << ',' << r.e_l2 << ',' << r.e_linf << ',' << r.md_bp
        << ',' << r.se << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace ccx
