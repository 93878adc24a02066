#ifndef XSCREEN_PAIRED_HPP
#define XSCREEN_PAIRED_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xscreen/stats.hpp"

namespace xscreen::paired {

/// Matched-pair differences for several outcomes, one row per pair, plus
/// optional pair-level modifier labels (values 'A'/'B') for effect-
/// modification tests. CSV form: `pair[,split],out:<name>...,mod:<name>...`.
struct PairTable {
  std::vector<std::string> pair_ids;
  std::vector<std::string> split;  // empty vector when no split column
  std::vector<std::string> outcome_order;
  std::map<std::string, std::vector<std::optional<double>>> outcomes;
  std::vector<std::string> modifier_order;
  std::map<std::string, std::vector<std::optional<char>>> modifiers;

  std::size_t n() const { return pair_ids.size(); }
  bool has_outcome(const std::string& name) const { return outcomes.count(name) > 0; }

  /// Differences with missing pairs dropped.
  stats::PairedOutcome paired_outcome(const std::string& name) const;

  /// Differences of `outcome` split by the modifier label (A first). Pairs
  /// missing either value are dropped.
  std::pair<std::vector<double>, std::vector<double>> modifier_groups(
      const std::string& outcome, const std::string& modifier) const;

  /// Rows whose split label equals `level`.
  PairTable filter_split(const std::string& level) const;

  std::vector<std::string> split_levels() const;

  /// Append another table's rows (outcome/modifier columns must match).
  void append(const PairTable& other);
};

PairTable load_pair_table(const std::string& path);
PairTable pair_table_from_string(const std::string& content);
std::string to_csv(const PairTable& table);
void save_pair_table(const PairTable& table, const std::string& path);

/// Content fingerprint of the canonical CSV form.
std::string digest(const PairTable& table);

}  // namespace xscreen::paired

#endif  // XSCREEN_PAIRED_HPP
