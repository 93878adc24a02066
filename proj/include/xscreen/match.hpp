#ifndef XSCREEN_MATCH_HPP
#define XSCREEN_MATCH_HPP

#include <optional>
#include <string>
#include <vector>

#include "xscreen/core.hpp"
#include "xscreen/paired.hpp"

namespace xscreen::match {

enum class DistanceKind { mahalanobis, normalized_euclidean };

struct MatchConfig {
  std::vector<std::string> covariates;
  DistanceKind distance = DistanceKind::mahalanobis;
  std::optional<double> caliper;      // in distance units
  /// When set, an eventually-treated control must stay untreated through
  /// index_time + time_window to be eligible.
  std::optional<double> time_window;
};

struct MatchedPair {
  std::string treated_id;
  std::string control_id;
  double index_time = 0.0;  // the treated subject's treatment time
  double distance = 0.0;
};

struct MatchResult {
  std::vector<MatchedPair> pairs;
  std::vector<std::string> unmatched_treated;
  /// Set when a singular covariance forced the normalized-euclidean fallback.
  bool covariance_fallback = false;
};

struct BalanceRow {
  std::string covariate;
  std::optional<double> pre_std_diff;   // missing when the pooled SD is 0
  std::optional<double> post_std_diff;
  bool flagged = false;  // |post| >= 0.2
};

struct BalanceTable {
  std::vector<BalanceRow> rows;
};

/// Greedy sequential risk-set matching: treated subjects in increasing
/// index time (ties by id), each matched to the nearest eligible not-yet-
/// treated subject within the caliper. Controls are used at most once;
/// treated subjects with no eligible control are reported unmatched.
MatchResult risk_set_match(const core::Dataset& dataset, const MatchConfig& config);

/// Standardized differences before and after matching. The denominator for
/// both columns is the pre-match pooled standard deviation.
BalanceTable balance(const core::Dataset& dataset,
                     const std::vector<MatchedPair>& pairs,
                     const std::vector<std::string>& covariates);

/// Treated-minus-control outcome differences for the matched pairs; the
/// pair's split label is the treated subject's level.
paired::PairTable build_pair_table(const core::Dataset& dataset,
                                   const std::vector<MatchedPair>& pairs);

std::string pairs_to_csv(const std::vector<MatchedPair>& pairs);
std::vector<MatchedPair> pairs_from_csv(const std::string& content);
std::vector<MatchedPair> load_pairs(const std::string& path);

std::string balance_to_csv(const BalanceTable& table);

}  // namespace xscreen::match

#endif  // XSCREEN_MATCH_HPP
