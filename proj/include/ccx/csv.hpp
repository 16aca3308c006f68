#pragma once

#include <string>
#include <vector>

namespace ccx {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;
};

// Lines starting with '#' are skipped. With has_header=false every line is data.
CsvTable read_csv(const std::string& path, bool has_header = true);
std::vector<std::vector<double>> read_numeric_matrix(const std::string& path);

}  // namespace ccx
