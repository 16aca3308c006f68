#pragma once

#include <string>
#include <vector>

namespace ccx {

// Exposure moments on a date grid; standard errors are present for sampled profiles only.
struct ExposureProfile {
  std::string source;
  std::vector<double> times, ee, epe, ene;
  std::vector<double> se_ee, se_epe;  // empty or one per date

  int size() const { return static_cast<int>(times.size()); }
  bool has_se() const { return !se_ee.empty(); }
  // Throws NumericalError if lengths differ, ENE != EE - EPE or EPE < max(EE, 0) beyond rounding.
  void validate(double tol = 1e-12) const;
};

// Exposure dates t_i = i T / count, i = 0..count.
std::vector<double> exposure_dates(double horizon, int count);

// CSV with a versioned comment header; columns t,EE,EPE,ENE[,SE_EE,SE_EPE].
void write_profile(const std::string& path, const ExposureProfile& p);
ExposureProfile read_profile(const std::string& path);

}  // namespace ccx
