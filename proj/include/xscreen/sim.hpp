#ifndef XSCREEN_SIM_HPP
#define XSCREEN_SIM_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "xscreen/paired.hpp"
#include "xscreen/plan.hpp"
#include "xscreen/screen.hpp"

namespace xscreen::sim {

struct PartSpec {
  std::string label;
  int pairs = 0;
};

struct Noise {
  enum class Kind { normal, student_t };
  Kind kind = Kind::normal;
  int df = 5;  // student_t only
};

/// Synthetic matched-pair study: per-part pair counts, shift effects in SD
/// units per (part, outcome), exchangeable cross-outcome correlation within a
/// pair.
struct Scenario {
  std::vector<PartSpec> parts;
  std::vector<std::string> outcomes;
  std::vector<std::vector<double>> effects;  // parts x outcomes
  double rho = 0.0;
  Noise noise;
  int replications = 1000;
  std::uint64_t seed = 0;
};

void validate_scenario(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);

/// Pair differences for every part, deterministic in (seed, rep_index).
std::map<std::string, paired::PairTable> generate(const Scenario& scenario,
                                                  int rep_index);

/// Rule-based stand-in for a team: screens outcomes on the explore data and
/// assembles a gatekeeping plan. Human exploratory analysis is not simulable;
/// this mirrors the automated screening rule with a pluggable plan builder.
struct TeamProxy {
  stats::Statistic screen_statistic;  // defaults to signed_rank
  double screen_threshold = 0.05;
  enum class Builder { fixed_sequence_by_p, single_stage_bonferroni };
  Builder builder = Builder::fixed_sequence_by_p;
  int max_tests = 4;
};

plan::Plan proxy_build_plan(const TeamProxy& proxy,
                            const paired::PairTable& explore_data,
                            const std::vector<std::string>& outcomes,
                            double budget, const std::string& team);

enum class MethodKind {
  two_team,
  automated,
  holm_full,
  multi_split,               // one proxy plan per part, built on the others
  single_split,              // plan on a fraction, tests on the complement
  three_team_naive_union,    // each team explores one part, plans for the rest
  three_team_leave_one_out,  // each team explores all but its target part
  split_202060,              // random 20/20/60; two teams, 80% targets
};

struct MethodConfig {
  MethodKind kind = MethodKind::two_team;
  double alpha = 0.05;
  double plan_fraction = 0.2;  // single_split only
};

std::string method_name(const MethodConfig& config);
MethodKind method_kind_from_name(const std::string& name);

struct Rate {
  double value = 0.0;
  double mc_se = 0.0;
};

struct MethodMetrics {
  std::string method;
  long long reps = 0;
  long long any_rejection = 0;
  long long false_global = 0;     // >=1 rejection of a globally null outcome
  long long any_replicable = 0;
  long long false_replicable = 0; // replicable claim for an outcome null in >=1 part
  std::map<std::string, long long> rejections;  // "part:outcome" -> count

  Rate fwer() const;
  Rate any_rejection_rate() const;
  Rate replicability_rate() const;
  Rate false_replicability_rate() const;
};

struct MetricsTable {
  std::string note;  // limitation header, included in every emitted report
  std::vector<MethodMetrics> methods;
};

/// Run every method on every replication and aggregate error/power metrics.
/// Bitwise reproducible for a given (scenario, seed) regardless of workers.
MetricsTable run_comparison(const Scenario& scenario,
                            const std::vector<MethodConfig>& methods,
                            const std::vector<TeamProxy>& proxies,
                            int workers = 1);

std::string metrics_to_csv(const MetricsTable& table);
nlohmann::json metrics_to_json(const MetricsTable& table);

}  // namespace xscreen::sim

#endif  // XSCREEN_SIM_HPP
