#include "xscreen/match.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "xscreen/csv.hpp"
#include "xscreen/mathutil.hpp"

namespace xscreen::match {

namespace {

/// Covariate rows (NaN = missing) for the configured covariate list.
Eigen::MatrixXd covariate_matrix(const core::Dataset& dataset,
                                 const std::vector<std::string>& names) {
  Eigen::MatrixXd x(long(dataset.subjects.size()), long(names.size()));
  for (std::size_t i = 0; i < dataset.subjects.size(); ++i) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      const auto& value = dataset.subjects[i].covariates.at(names[j]);
      x(long(i), long(j)) = value ? *value : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return x;
}

Eigen::VectorXd column_sds(const Eigen::MatrixXd& x) {
  Eigen::VectorXd sds(x.cols());
  for (long j = 0; j < x.cols(); ++j) {
    double sum = 0.0, sum2 = 0.0;
    long n = 0;
    for (long i = 0; i < x.rows(); ++i) {
      if (std::isnan(x(i, j))) continue;
      sum += x(i, j);
      sum2 += x(i, j) * x(i, j);
      ++n;
    }
    if (n < 2) {
      sds(j) = 0.0;
      continue;
    }
    const double mean = sum / double(n);
    const double var = (sum2 - double(n) * mean * mean) / double(n - 1);
    sds(j) = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  return sds;
}

struct DistanceFn {
  bool mahalanobis = false;
  Eigen::MatrixXd precision;  // for mahalanobis
  Eigen::VectorXd sds;        // for normalized euclidean

  double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    const Eigen::VectorXd d = a - b;
    if (mahalanobis) {
      return std::sqrt(std::max(0.0, d.dot(precision * d)));
    }
    double sum = 0.0;
    for (long j = 0; j < d.size(); ++j) {
      if (sds(j) > 0.0) {
        const double z = d(j) / sds(j);
        sum += z * z;
      }
    }
    return std::sqrt(sum);
  }
};

/// Covariance of complete rows with ridge 1e-8 on the diagonal. Returns
/// false when the result is not usable as a Mahalanobis metric.
bool build_precision(const Eigen::MatrixXd& x, Eigen::MatrixXd& precision) {
  std::vector<long> complete;
  for (long i = 0; i < x.rows(); ++i) {
    if (!x.row(i).hasNaN()) complete.push_back(i);
  }
  const long p = x.cols();
  if (long(complete.size()) < 2) return false;
  Eigen::MatrixXd rows(long(complete.size()), p);
  for (std::size_t k = 0; k < complete.size(); ++k) rows.row(long(k)) = x.row(complete[k]);
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - mean;
  Eigen::MatrixXd cov =
      centered.transpose() * centered / double(long(complete.size()) - 1);
  cov.diagonal().array() += 1e-8;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
  precision = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
  if (!precision.allFinite()) return false;
  return true;
}

}  // namespace

MatchResult risk_set_match(const core::Dataset& dataset, const MatchConfig& config) {
  if (config.covariates.empty()) {
    throw Error(ErrCode::no_covariates, "no matching covariates configured");
  }
  for (const std::string& name : config.covariates) {
    if (!dataset.covariate_times.count(name)) {
      throw Error(ErrCode::unknown_column, "covariate not in schema: " + name);
    }
  }
  if (config.caliper && *config.caliper < 0.0) {
    throw Error(ErrCode::bad_params, "caliper must be nonnegative");
  }

  // Treated order: increasing index time, ties by id.
  std::vector<std::size_t> treated_idx;
  for (std::size_t i = 0; i < dataset.subjects.size(); ++i) {
    if (dataset.subjects[i].treated) treated_idx.push_back(i);
  }
  std::sort(treated_idx.begin(), treated_idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = dataset.subjects[a];
    const auto& sb = dataset.subjects[b];
    if (*sa.treatment_time != *sb.treatment_time) {
      return *sa.treatment_time < *sb.treatment_time;
    }
    return sa.id < sb.id;
  });

  // Every config covariate must be observed by each index time.
  for (std::size_t ti : treated_idx) {
    const double index_time = *dataset.subjects[ti].treatment_time;
    for (const std::string& name : config.covariates) {
      const auto& obs_time = dataset.covariate_times.at(name);
      if (obs_time && *obs_time > index_time) {
        throw Error(ErrCode::bad_params,
                    "covariate " + name + " (observed at " +
                        format_double(*obs_time) + ") is post-treatment for "
                        "subject " + dataset.subjects[ti].id +
                        " (index time " +
                        format_double(index_time) + ")");
      }
    }
  }

  const Eigen::MatrixXd x = covariate_matrix(dataset, config.covariates);
  MatchResult result;
  DistanceFn dist;
  dist.sds = column_sds(x);
  if (config.distance == DistanceKind::mahalanobis) {
    dist.mahalanobis = build_precision(x, dist.precision);
    result.covariance_fallback = !dist.mahalanobis;
  }

  std::vector<bool> used_as_control(dataset.subjects.size(), false);
  for (std::size_t ti : treated_idx) {
    const core::Subject& treated = dataset.subjects[ti];
    if (used_as_control[ti]) continue;  // consumed as someone's control
    if (x.row(long(ti)).hasNaN()) {
      result.unmatched_treated.push_back(treated.id);
      continue;
    }
    const double index_time = *treated.treatment_time;
    double clearance = index_time;
    if (config.time_window) clearance += *config.time_window;

    double best_dist = std::numeric_limits<double>::infinity();
    std::size_t best = dataset.subjects.size();
    for (std::size_t ci = 0; ci < dataset.subjects.size(); ++ci) {
      if (ci == ti || used_as_control[ci]) continue;
      const core::Subject& cand = dataset.subjects[ci];
      if (cand.treated && *cand.treatment_time <= clearance) continue;
      if (x.row(long(ci)).hasNaN()) continue;
      const double d = dist(x.row(long(ti)).transpose(), x.row(long(ci)).transpose());
      if (config.caliper && d > *config.caliper) continue;
      if (d < best_dist ||
          (d == best_dist && best < dataset.subjects.size() &&
           cand.id < dataset.subjects[best].id)) {
        best_dist = d;
        best = ci;
      }
    }
    if (best == dataset.subjects.size()) {
      result.unmatched_treated.push_back(treated.id);
      continue;
    }
    used_as_control[best] = true;
    result.pairs.push_back(
        {treated.id, dataset.subjects[best].id, index_time, best_dist});
  }
  return result;
}

BalanceTable balance(const core::Dataset& dataset,
                     const std::vector<MatchedPair>& pairs,
                     const std::vector<std::string>& covariates) {
  if (pairs.empty()) {
    throw Error(ErrCode::empty_pairs, "balance requires at least one pair");
  }
  auto group_mean_sd = [](const std::vector<double>& v) {
    double sum = 0.0, sum2 = 0.0;
    for (double x : v) {
      sum += x;
      sum2 += x * x;
    }
    const double n = double(v.size());
    const double mean = v.empty() ? 0.0 : sum / n;
    const double var = v.size() >= 2 ? (sum2 - n * mean * mean) / (n - 1.0) : 0.0;
    return std::pair<double, double>(mean, var > 0.0 ? std::sqrt(var) : 0.0);
  };

  BalanceTable table;
  for (const std::string& name : covariates) {
    if (!dataset.covariate_times.count(name)) {
      throw Error(ErrCode::unknown_column, "covariate not in schema: " + name);
    }
    std::vector<double> pre_t, pre_c;
    for (const core::Subject& s : dataset.subjects) {
      const auto& value = s.covariates.at(name);
      if (!value) continue;
      (s.treated ? pre_t : pre_c).push_back(*value);
    }
    std::vector<double> post_t, post_c;
    for (const MatchedPair& p : pairs) {
      const core::Subject* t = dataset.find(p.treated_id);
      const core::Subject* c = dataset.find(p.control_id);
      if (!t || !c) {
        throw Error(ErrCode::bad_params, "pair references unknown subject");
      }
      if (t->covariates.at(name)) post_t.push_back(*t->covariates.at(name));
      if (c->covariates.at(name)) post_c.push_back(*c->covariates.at(name));
    }

    const auto [mt, st] = group_mean_sd(pre_t);
    const auto [mc, sc] = group_mean_sd(pre_c);
    const double pooled = std::sqrt((st * st + sc * sc) / 2.0);

    BalanceRow row;
    row.covariate = name;
    if (pooled > 0.0) {
      row.pre_std_diff = (mt - mc) / pooled;
      const auto [pmt, pst] = group_mean_sd(post_t);
      const auto [pmc, psc] = group_mean_sd(post_c);
      (void)pst; (void)psc;
      row.post_std_diff = (pmt - pmc) / pooled;
      row.flagged = std::fabs(*row.post_std_diff) >= 0.2;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

paired::PairTable build_pair_table(const core::Dataset& dataset,
                                   const std::vector<MatchedPair>& pairs) {
  paired::PairTable table;
  table.outcome_order = dataset.outcome_order;
  for (const auto& name : table.outcome_order) table.outcomes[name] = {};
  for (const MatchedPair& p : pairs) {
    const core::Subject* t = dataset.find(p.treated_id);
    const core::Subject* c = dataset.find(p.control_id);
    if (!t || !c) {
      throw Error(ErrCode::bad_params, "pair references unknown subject");
    }
    table.pair_ids.push_back(p.treated_id);
    table.split.push_back(t->split_level);
    for (const auto& name : table.outcome_order) {
      const auto& yt = t->outcomes.at(name);
      const auto& yc = c->outcomes.at(name);
      if (yt && yc) table.outcomes[name].push_back(*yt - *yc);
      else table.outcomes[name].push_back(std::nullopt);
    }
  }
  return table;
}

std::string pairs_to_csv(const std::vector<MatchedPair>& pairs) {
  csv::Table t;
  t.header = {"treated_id", "control_id", "index_time", "distance"};
  for (const MatchedPair& p : pairs) {
    t.rows.push_back({p.treated_id, p.control_id, format_double(p.index_time),
                      format_double(p.distance)});
  }
  return csv::write_string(t);
}

std::vector<MatchedPair> pairs_from_csv(const std::string& content) {
  const csv::Table t = csv::read_string(content);
  const int tc = t.column("treated_id");
  const int cc = t.column("control_id");
  const int ic = t.column("index_time");
  const int dc = t.column("distance");
  if (tc < 0 || cc < 0 || ic < 0 || dc < 0) {
    throw Error(ErrCode::unknown_column,
                "pairs file requires treated_id,control_id,index_time,distance");
  }
  std::vector<MatchedPair> pairs;
  int line = 0;
  for (const auto& row : t.rows) {
    ++line;
    MatchedPair p;
    p.treated_id = row[std::size_t(tc)];
    p.control_id = row[std::size_t(cc)];
    const auto it = csv::parse_cell(row[std::size_t(ic)], line, "index_time");
    const auto d = csv::parse_cell(row[std::size_t(dc)], line, "distance");
    if (!it || !d) {
      throw Error(ErrCode::malformed_row,
                  "line " + std::to_string(line) + ": missing index_time/distance");
    }
    p.index_time = *it;
    p.distance = *d;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<MatchedPair> load_pairs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrCode::malformed_row, "cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return pairs_from_csv(buf.str());
}

std::string balance_to_csv(const BalanceTable& table) {
  csv::Table t;
  t.header = {"covariate", "pre_match_std_diff", "post_match_std_diff", "flag_ge_0.2"};
  for (const BalanceRow& row : table.rows) {
    t.rows.push_back({row.covariate, csv::format_cell(row.pre_std_diff),
                      csv::format_cell(row.post_std_diff),
                      row.flagged ? "1" : "0"});
  }
  return csv::write_string(t);
}

}  // namespace xscreen::match
