#ifndef XSCREEN_PLAN_HPP
#define XSCREEN_PLAN_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "xscreen/paired.hpp"
#include "xscreen/stats.hpp"

namespace xscreen::plan {

struct PlanTest {
  stats::TestSpec spec;
  double alpha = 0.0;
};

/// One gatekeeping stage: testing advances past it only if every test in the
/// stage rejects.
struct Stage {
  std::vector<PlanTest> tests;
};

struct Plan {
  std::string team;
  double budget = 0.025;
  std::vector<Stage> stages;
};

struct TestOutcome {
  stats::TestSpec spec;
  double alpha = 0.0;
  std::optional<double> p_value;  // absent for stages never reached
  bool rejected = false;
  bool approximate = false;  // Monte Carlo rank-sum bound
};

struct PlanResult {
  std::string team;
  double budget = 0.0;
  std::vector<std::vector<TestOutcome>> stages;
  /// 1-based index of the first stage that failed to reject all its tests;
  /// absent when every stage was fully rejected.
  std::optional<int> stopped_at_stage;

  bool completed() const { return !stopped_at_stage.has_value(); }
  std::vector<TestOutcome> rejections() const;
};

struct ExecOptions {
  std::uint64_t seed = 0;
  long long mc_draws = 100000;  // for gamma > 1 rank-sum tests
};

/// Plan files use the JSON schema in schemas/plan.schema.json.
Plan parse_plan(const nlohmann::json& doc);
Plan parse_plan_file(const std::string& path);
nlohmann::json plan_to_json(const Plan& plan);

/// Structural soundness checks; violations are data, not exceptions.
std::vector<std::string> validate_plan(const Plan& plan);

/// Gate-respecting execution against paired data: stages run in order, a
/// test rejects iff p < alpha (strict), later stages are left untested after
/// the first stage that does not fully reject.
PlanResult execute_plan(const Plan& plan, const paired::PairTable& data,
                        const ExecOptions& options = {});

/// Evaluation hook: (test, stage index, test index) -> (p-value, approximate).
using TestEvaluator =
    std::function<std::pair<double, bool>(const PlanTest&, int, int)>;

PlanResult execute_plan_with(const Plan& plan, const TestEvaluator& evaluate);

/// Content fingerprint of the canonical JSON form, recorded in reports.
std::string plan_hash(const Plan& plan);

/// True if any test needs a Monte Carlo bound (rank_sum at gamma > 1).
bool needs_monte_carlo(const Plan& plan);

}  // namespace xscreen::plan

#endif  // XSCREEN_PLAN_HPP
