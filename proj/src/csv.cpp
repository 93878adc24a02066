#include "xscreen/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "xscreen/error.hpp"
#include "xscreen/mathutil.hpp"

namespace xscreen::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  return cells;
}

}  // namespace

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return int(i);
  }
  return -1;
}

Table read_string(const std::string& content) {
  Table t;
  std::istringstream in(content);
  std::string line;
  bool first = true;
  int data_line = 0;
  while (std::getline(in, line)) {
    if (line.empty() && in.eof()) break;
    if (first) {
      t.header = split_line(line);
      first = false;
      continue;
    }
    ++data_line;
    if (line.empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != t.header.size()) {
      throw Error(ErrCode::malformed_row,
                  "line " + std::to_string(data_line) + ": expected " +
                      std::to_string(t.header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (first) {
    throw Error(ErrCode::malformed_row, "empty file: missing header row");
  }
  return t;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrCode::malformed_row, "cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_string(buf.str());
}

std::string write_string(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

void write_file(const Table& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrCode::malformed_row, "cannot write file: " + path);
  }
  out << write_string(table);
}

std::optional<double> parse_cell(const std::string& cell, int line,
                                 const std::string& column) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrCode::malformed_row, "line " + std::to_string(line) +
                                            ", column " + column +
                                            ": not a number: '" + cell + "'");
  }
  return value;
}

std::string format_cell(const std::optional<double>& value) {
  if (!value) return "";
  return format_double(*value);
}

}  // namespace xscreen::csv
