#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ccx/csv.hpp"
#include "ccx/error.hpp"
#include "ccx/profile.hpp"

namespace ccx {

namespace {
constexpr const char* kMagic = "# ccx-profile v1";
}

void ExposureProfile::validate(double tol) const {
  const size_t n = times.size();
  if (ee.size() != n || epe.size() != n || ene.size() != n) throw NumericalError("profile: column lengths differ");
  if (!se_ee.empty() && (se_ee.size() != n || se_epe.size() != n)) throw NumericalError("profile: SE length differs");
  for (size_t i = 0; i < n; ++i) {
    double scale = std::max({1.0, std::abs(ee[i]), std::abs(epe[i])});
    if (std::abs(ene[i] - (ee[i] - epe[i])) > tol * scale) {
      std::ostringstream os;
      os << "profile: ENE != EE - EPE at t = " << times[i];
      throw NumericalError(os.str());
    }
    if (epe[i] < std::max(ee[i], 0.0) - tol * scale) {
      std::ostringstream os;
      os << "profile: EPE < max(EE, 0) at t = " << times[i];
      throw NumericalError(os.str());
    }
  }
}

std::vector<double> exposure_dates(double horizon, int count) {
  if (!(horizon > 0.0) || count < 1) throw InvalidArgument("exposure dates need a positive horizon and count");
  std::vector<double> t(count + 1);
  for (int i = 0; i <= count; ++i) t[i] = horizon * i / count;
  return t;
}

void write_profile(const std::string& path, const ExposureProfile& p) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << kMagic << "\n# source: " << p.source << "\n";
  out << "t,EE,EPE,ENE";
  if (p.has_se()) out << ",SE_EE,SE_EPE";
  out << "\n" << std::setprecision(17);
  for (int i = 0; i < p.size(); ++i) {
    out << p.times[i] << ',' << p.ee[i] << ',' << p.epe[i] << ',' << p.ene[i];
    if (p.has_se()) out << ',' << p.se_ee[i] << ',' << p.se_epe[i];
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

ExposureProfile read_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string first, second;
  std::getline(in, first);
  if (first != kMagic) throw IoError(path + ": not a ccx profile (expected header '" + kMagic + "')");
  ExposureProfile p;
  std::getline(in, second);
  const std::string tag = "# source: ";
  if (second.rfind(tag, 0) == 0) p.source = second.substr(tag.size());
  CsvTable t = read_csv(path);
  auto col = [&](const char* name) {
    int c = t.column(name);
    if (c < 0) throw IoError(path + ": missing column '" + name + "'");
    return c;
  };
  const int ct = col("t"), ce = col("EE"), cp = col("EPE"), cn = col("ENE");
  const bool se = t.column("SE_EE") >= 0;
  const int cse = se ? col("SE_EE") : -1, csp = se ? col("SE_EPE") : -1;
  for (const auto& r : t.rows) {
    p.times.push_back(r[ct]);
    p.ee.push_back(r[ce]);
    p.epe.push_back(r[cp]);
    p.ene.push_back(r[cn]);
    if (se) {
      p.se_ee.push_back(r[cse]);
      p.se_epe.push_back(r[csp]);
    }
  }
  return p;
}

}  // namespace ccx
