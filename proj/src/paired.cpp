#include "xscreen/paired.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "xscreen/csv.hpp"
#include "xscreen/error.hpp"
#include "xscreen/mathutil.hpp"

namespace xscreen::paired {

stats::PairedOutcome PairTable::paired_outcome(const std::string& name) const {
  auto it = outcomes.find(name);
  if (it == outcomes.end()) {
    throw Error(ErrCode::missing_outcome, "outcome not in paired data: " + name);
  }
  stats::PairedOutcome po;
  po.outcome_name = name;
  for (const auto& v : it->second) {
    if (v) po.diffs.push_back(*v);
    else ++po.n_dropped_missing;
  }
  return po;
}

std::pair<std::vector<double>, std::vector<double>> PairTable::modifier_groups(
    const std::string& outcome, const std::string& modifier) const {
  auto oit = outcomes.find(outcome);
  if (oit == outcomes.end()) {
    throw Error(ErrCode::missing_outcome, "outcome not in paired data: " + outcome);
  }
  auto mit = modifiers.find(modifier);
  if (mit == modifiers.end()) {
    throw Error(ErrCode::missing_outcome,
                "modifier not in paired data: " + modifier);
  }
  std::pair<std::vector<double>, std::vector<double>> groups;
  for (std::size_t i = 0; i < n(); ++i) {
    const auto& value = oit->second[i];
    const auto& label = mit->second[i];
    if (!value || !label) continue;
    if (*label == 'A') groups.first.push_back(*value);
    else groups.second.push_back(*value);
  }
  return groups;
}

PairTable PairTable::filter_split(const std::string& level) const {
  PairTable out;
  out.outcome_order = outcome_order;
  out.modifier_order = modifier_order;
  for (const auto& name : outcome_order) out.outcomes[name] = {};
  for (const auto& name : modifier_order) out.modifiers[name] = {};
  for (std::size_t i = 0; i < n(); ++i) {
    if (split.empty() || split[i] != level) continue;
    out.pair_ids.push_back(pair_ids[i]);
    out.split.push_back(split[i]);
    for (const auto& name : outcome_order) {
      out.outcomes[name].push_back(outcomes.at(name)[i]);
    }
    for (const auto& name : modifier_order) {
      out.modifiers[name].push_back(modifiers.at(name)[i]);
    }
  }
  return out;
}

std::vector<std::string> PairTable::split_levels() const {
  std::set<std::string> levels;
  for (const std::string& s : split) {
    if (!s.empty()) levels.insert(s);
  }
  return {levels.begin(), levels.end()};
}

void PairTable::append(const PairTable& other) {
  if (other.outcome_order != outcome_order ||
      other.modifier_order != modifier_order) {
    throw Error(ErrCode::bad_params, "pair tables have different columns");
  }
  const std::size_t old_n = pair_ids.size();
  pair_ids.insert(pair_ids.end(), other.pair_ids.begin(), other.pair_ids.end());
  if (!split.empty() || !other.split.empty()) {
    split.resize(old_n);  // pad if this table had no split column
    if (other.split.empty()) split.resize(pair_ids.size());
    else split.insert(split.end(), other.split.begin(), other.split.end());
  }
  for (const auto& name : outcome_order) {
    auto& col = outcomes[name];
    const auto& src = other.outcomes.at(name);
    col.insert(col.end(), src.begin(), src.end());
  }
  for (const auto& name : modifier_order) {
    auto& col = modifiers[name];
    const auto& src = other.modifiers.at(name);
    col.insert(col.end(), src.begin(), src.end());
  }
}

PairTable pair_table_from_string(const std::string& content) {
  const csv::Table table = csv::read_string(content);
  PairTable out;
  int pair_col = -1, split_col = -1;
  std::vector<std::pair<std::string, int>> outcome_cols, modifier_cols;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    const std::string& name = table.header[i];
    if (name == "pair") pair_col = int(i);
    else if (name == "split") split_col = int(i);
    else if (name.rfind("out:", 0) == 0) outcome_cols.emplace_back(name.substr(4), int(i));
    else if (name.rfind("mod:", 0) == 0) modifier_cols.emplace_back(name.substr(4), int(i));
    else {
      throw Error(ErrCode::unknown_column, "unknown paired-data column: " + name);
    }
  }
  if (pair_col < 0) {
    throw Error(ErrCode::unknown_column, "paired data requires a 'pair' column");
  }
  for (const auto& [name, col] : outcome_cols) {
    out.outcome_order.push_back(name);
    out.outcomes[name] = {};
  }
  for (const auto& [name, col] : modifier_cols) {
    out.modifier_order.push_back(name);
    out.modifiers[name] = {};
  }
  int line = 0;
  for (const auto& row : table.rows) {
    ++line;
    out.pair_ids.push_back(row[std::size_t(pair_col)]);
    if (split_col >= 0) out.split.push_back(row[std::size_t(split_col)]);
    for (const auto& [name, col] : outcome_cols) {
      out.outcomes[name].push_back(csv::parse_cell(row[std::size_t(col)], line, "out:" + name));
    }
    for (const auto& [name, col] : modifier_cols) {
      const std::string& cell = row[std::size_t(col)];
      if (cell.empty()) out.modifiers[name].push_back(std::nullopt);
      else if (cell == "A" || cell == "B") out.modifiers[name].push_back(cell[0]);
      else {
        throw Error(ErrCode::malformed_row,
                    "line " + std::to_string(line) + ", column mod:" + name +
                        ": modifier must be A or B, got '" + cell + "'");
      }
    }
  }
  return out;
}

PairTable load_pair_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrCode::malformed_row, "cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return pair_table_from_string(buf.str());
}

std::string to_csv(const PairTable& table) {
  csv::Table t;
  t.header.push_back("pair");
  const bool has_split = !table.split.empty();
  if (has_split) t.header.push_back("split");
  for (const auto& name : table.outcome_order) t.header.push_back("out:" + name);
  for (const auto& name : table.modifier_order) t.header.push_back("mod:" + name);
  for (std::size_t i = 0; i < table.n(); ++i) {
    std::vector<std::string> row;
    row.push_back(table.pair_ids[i]);
    if (has_split) row.push_back(table.split[i]);
    for (const auto& name : table.outcome_order) {
      row.push_back(csv::format_cell(table.outcomes.at(name)[i]));
    }
    for (const auto& name : table.modifier_order) {
      const auto& label = table.modifiers.at(name)[i];
      row.push_back(label ? std::string(1, *label) : "");
    }
    t.rows.push_back(std::move(row));
  }
  return csv::write_string(t);
}

void save_pair_table(const PairTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrCode::malformed_row, "cannot write file: " + path);
  }
  out << to_csv(table);
}

std::string digest(const PairTable& table) { return fnv1a64_hex(to_csv(table)); }

}  // namespace xscreen::paired
