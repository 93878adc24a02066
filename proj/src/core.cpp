#include "xscreen/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "xscreen/csv.hpp"
#include "xscreen/mathutil.hpp"
#include "xscreen/rng.hpp"

namespace xscreen::core {

namespace {

struct HeaderInfo {
  int id = -1, split = -1, treated = -1, treat_time = -1;
  std::vector<std::pair<std::string, int>> covariates;  // name -> column
  std::map<std::string, std::optional<double>> covariate_times;
  std::vector<std::pair<std::string, int>> outcomes;
  std::map<std::string, int> fallbacks;  // outcome name -> column
};

HeaderInfo parse_header(const std::vector<std::string>& header) {
  HeaderInfo h;
  std::set<std::string> seen_cov, seen_out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& name = header[i];
    const int col = int(i);
    if (name == "id") h.id = col;
    else if (name == "split") h.split = col;
    else if (name == "treated") h.treated = col;
    else if (name == "treat_time") h.treat_time = col;
    else if (name.rfind("cov:", 0) == 0) {
      std::string rest = name.substr(4);
      std::optional<double> time;
      if (auto at = rest.find('@'); at != std::string::npos) {
        const std::string time_str = rest.substr(at + 1);
        rest = rest.substr(0, at);
        time = csv::parse_cell(time_str, 0, name);
      }
      if (rest.empty() || !seen_cov.insert(rest).second) {
        throw Error(ErrCode::unknown_column, "bad covariate column: " + name);
      }
      h.covariates.emplace_back(rest, col);
      h.covariate_times[rest] = time;
    } else if (name.rfind("out:", 0) == 0) {
      std::string rest = name.substr(4);
      if (auto hash = rest.find("#fallback"); hash != std::string::npos && hash + 9 == rest.size()) {
        rest = rest.substr(0, hash);
        if (rest.empty() || h.fallbacks.count(rest)) {
          throw Error(ErrCode::unknown_column, "bad fallback column: " + name);
        }
        h.fallbacks[rest] = col;
      } else {
        if (rest.empty() || rest.find('#') != std::string::npos ||
            !seen_out.insert(rest).second) {
          throw Error(ErrCode::unknown_column, "bad outcome column: " + name);
        }
        h.outcomes.emplace_back(rest, col);
      }
    } else {
      throw Error(ErrCode::unknown_column, "unknown column: " + name);
    }
  }
  if (h.id < 0 || h.split < 0 || h.treated < 0 || h.treat_time < 0) {
    throw Error(ErrCode::unknown_column,
                "required columns id,split,treated,treat_time missing");
  }
  for (const auto& [name, col] : h.fallbacks) {
    if (!seen_out.count(name)) {
      throw Error(ErrCode::unknown_column,
                  "fallback column without primary outcome: out:" + name +
                      "#fallback");
    }
  }
  return h;
}

}  // namespace

const Subject* Dataset::find(const std::string& id) const {
  for (const Subject& s : subjects) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::set<std::string> Dataset::split_levels() const {
  std::set<std::string> levels;
  for (const Subject& s : subjects) {
    if (!s.split_level.empty()) levels.insert(s.split_level);
  }
  return levels;
}

Dataset ingest_string(const std::string& content, const IngestOptions& options) {
  const csv::Table table = csv::read_string(content);
  const HeaderInfo h = parse_header(table.header);

  for (const std::string& name : options.merge_fallback) {
    if (!h.fallbacks.count(name)) {
      throw Error(ErrCode::unknown_column,
                  "fallback merge requested for outcome without fallback "
                  "column: " + name);
    }
  }

  Dataset ds;
  for (const auto& [name, col] : h.covariates) ds.covariate_order.push_back(name);
  for (const auto& [name, col] : h.outcomes) ds.outcome_order.push_back(name);
  ds.covariate_times = h.covariate_times;
  ds.fallback_merged.assign(options.merge_fallback.begin(),
                            options.merge_fallback.end());

  std::set<std::string> ids;
  int line = 0;
  for (const auto& row : table.rows) {
    ++line;
    Subject s;
    s.id = row[std::size_t(h.id)];
    if (s.id.empty()) {
      throw Error(ErrCode::malformed_row,
                  "line " + std::to_string(line) + ": empty id");
    }
    if (!ids.insert(s.id).second) {
      throw Error(ErrCode::duplicate_id,
                  "line " + std::to_string(line) + ": duplicate id " + s.id);
    }
    s.split_level = row[std::size_t(h.split)];

    const std::string& treated_cell = row[std::size_t(h.treated)];
    if (treated_cell == "1") s.treated = true;
    else if (treated_cell == "0") s.treated = false;
    else {
      throw Error(ErrCode::malformed_row,
                  "line " + std::to_string(line) +
                      ": treated must be 0 or 1, got '" + treated_cell + "'");
    }
    s.treatment_time = csv::parse_cell(row[std::size_t(h.treat_time)], line, "treat_time");
    if (s.treated && !s.treatment_time) {
      throw Error(ErrCode::treated_without_time,
                  "line " + std::to_string(line) + ": treated subject " + s.id +
                      " has no treat_time");
    }
    if (!s.treated && s.treatment_time) {
      throw Error(ErrCode::malformed_row,
                  "line " + std::to_string(line) + ": untreated subject " +
                      s.id + " carries a treat_time");
    }

    for (const auto& [name, col] : h.covariates) {
      s.covariates[name] = csv::parse_cell(row[std::size_t(col)], line, "cov:" + name);
    }
    for (const auto& [name, col] : h.outcomes) {
      std::optional<double> value = csv::parse_cell(row[std::size_t(col)], line, "out:" + name);
      if (!value && options.merge_fallback.count(name)) {
        value = csv::parse_cell(row[std::size_t(h.fallbacks.at(name))], line,
                                "out:" + name + "#fallback");
      }
      s.outcomes[name] = value;
    }
    ds.subjects.push_back(std::move(s));
  }
  return ds;
}

Dataset ingest(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrCode::malformed_row, "cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return ingest_string(buf.str(), options);
}

std::string emit(const Dataset& dataset) {
  csv::Table t;
  t.header = {"id", "split", "treated", "treat_time"};
  for (const std::string& name : dataset.covariate_order) {
    std::string col = "cov:" + name;
    const auto& time = dataset.covariate_times.at(name);
    if (time) col += "@" + format_double(*time);
    t.header.push_back(col);
  }
  for (const std::string& name : dataset.outcome_order) {
    t.header.push_back("out:" + name);
  }
  for (const Subject& s : dataset.subjects) {
    std::vector<std::string> row;
    row.push_back(s.id);
    row.push_back(s.split_level);
    row.push_back(s.treated ? "1" : "0");
    row.push_back(csv::format_cell(s.treatment_time));
    for (const std::string& name : dataset.covariate_order) {
      row.push_back(csv::format_cell(s.covariates.at(name)));
    }
    for (const std::string& name : dataset.outcome_order) {
      row.push_back(csv::format_cell(s.outcomes.at(name)));
    }
    t.rows.push_back(std::move(row));
  }
  return csv::write_string(t);
}

BlindedView blind(const Dataset& dataset) {
  BlindedView view;
  view.covariate_order = dataset.covariate_order;
  view.covariate_times = dataset.covariate_times;
  for (const Subject& s : dataset.subjects) {
    BlindedSubject b;
    b.id = s.id;
    b.split_level = s.split_level;
    b.treated = s.treated;
    b.treatment_time = s.treatment_time;
    b.covariates = s.covariates;
    view.subjects.push_back(std::move(b));
  }
  return view;
}

std::string emit(const BlindedView& view) {
  csv::Table t;
  t.header = {"id", "split", "treated", "treat_time"};
  for (const std::string& name : view.covariate_order) {
    std::string col = "cov:" + name;
    const auto& time = view.covariate_times.at(name);
    if (time) col += "@" + format_double(*time);
    t.header.push_back(col);
  }
  for (const BlindedSubject& s : view.subjects) {
    std::vector<std::string> row;
    row.push_back(s.id);
    row.push_back(s.split_level);
    row.push_back(s.treated ? "1" : "0");
    row.push_back(csv::format_cell(s.treatment_time));
    for (const std::string& name : view.covariate_order) {
      row.push_back(csv::format_cell(s.covariates.at(name)));
    }
    t.rows.push_back(std::move(row));
  }
  return csv::write_string(t);
}

SplitAssignment split(const Dataset& dataset, const std::string& factor) {
  if (factor != dataset.split_factor) {
    throw Error(ErrCode::bad_params,
                "split factor '" + factor + "' is not the declared factor '" +
                    dataset.split_factor + "'");
  }
  std::vector<std::string> missing;
  SplitAssignment a;
  for (const Subject& s : dataset.subjects) {
    if (s.split_level.empty()) {
      missing.push_back(s.id);
    } else {
      a.parts[s.split_level].insert(s.id);
    }
  }
  if (!missing.empty()) {
    std::string ids;
    for (const std::string& id : missing) {
      if (!ids.empty()) ids += ", ";
      ids += id;
    }
    throw Error(ErrCode::missing_split_level,
                "subjects missing a split level: " + ids);
  }
  return a;
}

SplitAssignment random_split(const Dataset& dataset,
                             const std::vector<double>& fractions,
                             std::uint64_t seed) {
  if (fractions.empty()) {
    throw Error(ErrCode::bad_fractions, "no fractions given");
  }
  double sum = 0.0;
  for (double f : fractions) {
    if (f <= 0.0) throw Error(ErrCode::bad_fractions, "fractions must be positive");
    sum += f;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw Error(ErrCode::bad_fractions, "fractions must sum to 1");
  }

  const std::size_t n = dataset.subjects.size();
  // Largest-remainder rounding of the part sizes.
  std::vector<std::size_t> sizes(fractions.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    const double exact = fractions[k] * double(n);
    sizes[k] = std::size_t(std::floor(exact));
    assigned += sizes[k];
    remainders.emplace_back(exact - std::floor(exact), k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) {
    sizes[remainders[i % remainders.size()].second] += 1;
  }

  std::vector<std::string> ids;
  ids.reserve(n);
  for (const Subject& s : dataset.subjects) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(ids);

  SplitAssignment a;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    std::string label = "part" + std::to_string(k + 1);
    for (std::size_t i = 0; i < sizes[k]; ++i) a.parts[label].insert(ids[pos++]);
  }
  return a;
}

std::string dataset_digest(const Dataset& dataset) {
  std::string canon = emit(dataset);
  for (const std::string& name : dataset.fallback_merged) {
    canon += "\n#fallback_merged:" + name;
  }
  return fnv1a64_hex(canon);
}

}  // namespace xscreen::core
