#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace psdc {

// Floats render with 12 significant digits so CSV diffs are meaningful.
inline std::string csv_num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline void write_csv(std::ostream& os, const std::vector<std::string>& schema,
                      const std::vector<std::vector<std::string>>& rows) {
  for (size_t i = 0; i < schema.size(); ++i) {
    if (i) os << ',';
    os << schema[i];
  }
  os << "\r\n";
  for (const auto& row : rows) {
    if (row.size() != schema.size())
      throw std::invalid_argument("write_csv: row does not conform to schema");
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << row[i];
    }
    os << "\r\n";
  }
}

inline void write_csv_file(const std::string& path, const std::vector<std::string>& schema,
                           const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  write_csv(out, schema, rows);
}

inline std::vector<std::vector<std::string>> read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::string tok;
    std::stringstream ss(line);
    while (std::getline(ss, tok, ',')) row.push_back(tok);
    if (line.back() == ',') row.push_back("");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace psdc
