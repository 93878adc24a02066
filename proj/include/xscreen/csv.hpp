#ifndef XSCREEN_CSV_HPP
#define XSCREEN_CSV_HPP

#include <optional>
#include <string>
#include <vector>

namespace xscreen::csv {

/// Minimal comma-separated table: UTF-8, `.` decimal point, empty cell =
/// missing. Cells may not contain commas or newlines.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

Table read_file(const std::string& path);
Table read_string(const std::string& content);
std::string write_string(const Table& table);
void write_file(const Table& table, const std::string& path);

/// Parse a numeric cell; empty = missing. Throws on garbage, reporting the
/// 1-based data line and column name.
std::optional<double> parse_cell(const std::string& cell, int line,
                                 const std::string& column);

std::string format_cell(const std::optional<double>& value);

}  // namespace xscreen::csv

#endif  // XSCREEN_CSV_HPP
