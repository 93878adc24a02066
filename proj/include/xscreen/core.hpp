#ifndef XSCREEN_CORE_HPP
#define XSCREEN_CORE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xscreen/error.hpp"

namespace xscreen::core {

/// One study unit. Covariate and outcome values are keyed by name; a missing
/// value is an absent optional. treatment_time is present iff treated.
struct Subject {
  std::string id;
  std::string split_level;  // empty = missing
  bool treated = false;
  std::optional<double> treatment_time;
  std::map<std::string, std::optional<double>> covariates;
  std::map<std::string, std::optional<double>> outcomes;
};

/// A validated dataset plus the schemas discovered from the CSV header.
/// Covariate observation times: absent = baseline (effectively -inf on the
/// treatment-time scale).
struct Dataset {
  std::vector<Subject> subjects;
  std::vector<std::string> covariate_order;  // header order
  std::vector<std::string> outcome_order;
  std::map<std::string, std::optional<double>> covariate_times;
  std::string split_factor = "split";
  std::vector<std::string> fallback_merged;  // outcomes merged from fallback columns

  const Subject* find(const std::string& id) const;
  std::set<std::string> split_levels() const;
};

/// Outcome-free projection of a dataset: covariates and treatment only.
struct BlindedSubject {
  std::string id;
  std::string split_level;
  bool treated = false;
  std::optional<double> treatment_time;
  std::map<std::string, std::optional<double>> covariates;
};

struct BlindedView {
  std::vector<BlindedSubject> subjects;
  std::vector<std::string> covariate_order;
  std::map<std::string, std::optional<double>> covariate_times;
};

/// Disjoint, exhaustive partition of the subject ids.
struct SplitAssignment {
  std::map<std::string, std::set<std::string>> parts;
};

struct IngestOptions {
  /// Outcomes whose `out:<name>#fallback` column should fill missing values.
  std::set<std::string> merge_fallback;
};

/// Read and validate a subject CSV (columns id,split,treated,treat_time plus
/// cov:<name>[@<time>] and out:<name>[#fallback]).
Dataset ingest(const std::string& path, const IngestOptions& options = {});
Dataset ingest_string(const std::string& content, const IngestOptions& options = {});

/// Canonical CSV form; ingest(emit(ingest(f))) == ingest(f).
std::string emit(const Dataset& dataset);

BlindedView blind(const Dataset& dataset);
std::string emit(const BlindedView& view);

/// Partition by the declared split factor; order-independent.
SplitAssignment split(const Dataset& dataset, const std::string& factor);

/// Seeded random partition sized by largest-remainder rounding of fractions.
SplitAssignment random_split(const Dataset& dataset,
                             const std::vector<double>& fractions,
                             std::uint64_t seed);

/// Content fingerprint of the canonical form, recorded in report provenance.
std::string dataset_digest(const Dataset& dataset);

}  // namespace xscreen::core

#endif  // XSCREEN_CORE_HPP
