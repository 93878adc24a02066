#ifndef XSCREEN_SCREEN_HPP
#define XSCREEN_SCREEN_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "xscreen/paired.hpp"
#include "xscreen/plan.hpp"

namespace xscreen::screen {

/// A finding is identified by (outcome, direction); the sensitivity
/// parameter and statistic that detected it do not split findings.
struct Finding {
  std::string outcome;
  stats::Direction direction = stats::Direction::greater;

  friend auto operator<=>(const Finding&, const Finding&) = default;
};

/// One labeled part of the split data.
struct Part {
  std::string label;
  paired::PairTable data;
};

struct Provenance {
  std::map<std::string, std::string> plan_hashes;  // team -> hash
  std::string dataset_digest;
  std::uint64_t seed = 0;
  std::string toolkit_version;
  std::vector<std::string> notes;
};

/// One plan applied to one target part.
struct PlanExecution {
  std::string team;
  std::string target_part;
  plan::PlanResult result;
  std::vector<Finding> rejections;
};

struct FindingsReport {
  std::vector<PlanExecution> executions;
  double alpha_total = 0.05;
  Provenance provenance;

  /// Two-team accessors: R1 = first plan's rejections, R2 = second's.
  const std::vector<Finding>& r1() const { return executions.at(0).rejections; }
  const std::vector<Finding>& r2() const { return executions.at(1).rejections; }

  std::vector<Finding> global_null_findings() const;   // union
  std::vector<Finding> replicable_findings() const;    // in every execution
  /// Outcome-direction -> labels of target parts whose plan rejected it.
  std::map<Finding, std::vector<std::string>> rejecting_parts() const;
};

struct AutomatedConfig {
  std::vector<std::string> outcomes;
  stats::Statistic screen_statistic;  // defaults to signed_rank
  double screen_threshold = 0.025;
  double test_level = 0.025;
  double gamma = 1.0;
};

struct PlanAssignment {
  std::vector<std::string> explore_parts;
  std::string target_part;
  plan::Plan plan;
};

struct MultiSplitConfig {
  std::vector<std::string> parts;
  std::vector<PlanAssignment> assignments;
  double total_alpha = 0.05;
};

/// Two-team confirmatory run: plan A executes on part B and vice versa.
FindingsReport run_two_team(const plan::Plan& plan_a, const plan::Plan& plan_b,
                            const Part& part_a, const Part& part_b,
                            double alpha_total = 0.05,
                            const plan::ExecOptions& options = {});

/// One-team automated cross-screening: in each direction, outcomes whose
/// smaller one-sided p-value on the screening part is below the threshold are
/// tested on the other part with Holm at the test level.
FindingsReport run_automated(const AutomatedConfig& config, const Part& part_1,
                             const Part& part_2);

/// Holm step-down: reject while p_(k) < alpha/(n-k+1); returns the original
/// indices of rejected hypotheses, ascending.
std::vector<std::size_t> holm_adjust(const std::vector<double>& pvals, double alpha);

/// Holm over both one-sided tests of every outcome on the undivided data.
std::vector<Finding> run_holm_full(const std::vector<std::string>& outcomes,
                                   const paired::PairTable& full_data,
                                   double alpha, const stats::Statistic& statistic,
                                   double gamma);

/// Multi-split generalization: each plan executes only on its target part.
FindingsReport run_multi_split(const MultiSplitConfig& config,
                               const std::map<std::string, paired::PairTable>& parts,
                               const plan::ExecOptions& options = {});

MultiSplitConfig parse_multi_split_config(const nlohmann::json& doc,
                                          const std::string& base_dir);

/// Stable-key-order report JSON (byte-identical across runs for identical
/// inputs and seed).
nlohmann::json report_to_json(const FindingsReport& report);
std::string report_to_text(const FindingsReport& report);

}  // namespace xscreen::screen

#endif  // XSCREEN_SCREEN_HPP
