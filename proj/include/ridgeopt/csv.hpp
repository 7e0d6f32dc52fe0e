#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ridgeopt/errors.hpp"
#include "ridgeopt/linalg.hpp"

namespace ridgeopt {

/// Doubles are serialized with 17 significant digits so parsing them back
/// reproduces the exact bits.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Line-oriented CSV writer: comma separators, '.' decimals, LF endings.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot open for writing: " + path);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

/// Debug dump of a generated sample with header x1..xd,y.
inline void dump_xy_csv(const std::string& path, const Matrix& x, const Vector& y) {
  if (x.rows() != y.size()) throw DimensionError("dump_xy_csv: row count mismatch");
  CsvWriter csv(path);
  std::vector<std::string> cells;
  for (Index j = 0; j < x.cols(); ++j) cells.push_back("x" + std::to_string(j + 1));
  cells.push_back("y");
  csv.row(cells);
  for (Index i = 0; i < x.rows(); ++i) {
    cells.clear();
    for (Index j = 0; j < x.cols(); ++j) cells.push_back(format_double(x(i, j)));
    cells.push_back(format_double(y(i)));
    csv.row(cells);
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline bool parse_double(const std::string& text, double& out) {
  char* end = nullptr;
  const std::string trimmed = text;
  out = std::strtod(trimmed.c_str(), &end);
  if (end == trimmed.c_str()) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

}  // namespace detail

/// Reads a numeric CSV whose last column is the label. An optional header row
/// is skipped. Throws ConfigError naming the offending line on parse failure.
inline std::pair<Matrix, Vector> read_xy_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open: " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_checked = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (!detail::parse_double(cells[j], row[j])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (!header_checked && rows.empty()) {
        header_checked = true;  // header row
        continue;
      }
      throw ConfigError(path + ": line " + std::to_string(line_no) +
                        " is not numeric");
    }
    header_checked = true;
    if (!rows.empty() && row.size() != rows.front().size())
      throw ConfigError(path + ": line " + std::to_string(line_no) + " has " +
                        std::to_string(row.size()) + " columns, expected " +
                        std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError(path + ": no data rows");
  if (rows.front().size() < 2)
    throw ConfigError(path + ": need at least one feature column plus the label");

  const Index n = static_cast<Index>(rows.size());
  const Index d = static_cast<Index>(rows.front().size()) - 1;
  Matrix x(n, d);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    y(i) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
  }
  return {std::move(x), std::move(y)};
}

}  // namespace ridgeopt
