#include "ccx/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ccx/error.hpp"

namespace ccx {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

double parse_number(const std::string& cell, const std::string& path, int line_no) {
  try {
    size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw IoError(path + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
  }
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  CsvTable table;
  std::string line;
  int line_no = 0;
  bool header_done = !has_header;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto cells = split(t);
    if (!header_done) {
      table.header = cells;
      header_done = true;
      continue;
    }
    if (has_header && cells.size() != table.header.size())
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(table.header.size()) + " columns");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, path, line_no));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<std::vector<double>> read_numeric_matrix(const std::string& path) {
  return read_csv(path, false).rows;
}

}  // namespace ccx
