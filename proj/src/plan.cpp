#include "xscreen/plan.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "xscreen/mathutil.hpp"
#include "xscreen/rng.hpp"

namespace xscreen::plan {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrCode::schema_violation, path + ": " + what);
}

double require_number(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    schema_error(path + "." + key, "missing or non-numeric");
  }
  return j[key].get<double>();
}

std::string require_string(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    schema_error(path + "." + key, "missing or non-string");
  }
  return j[key].get<std::string>();
}

stats::Statistic parse_statistic(const json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "statistic must be an object");
  stats::Statistic stat;
  const std::string kind = require_string(j, path, "kind");
  try {
    stat.kind = stats::stat_kind_from_name(kind);
  } catch (const Error&) {
    schema_error(path + ".kind", "unknown statistic kind: " + kind);
  }
  if (stat.kind == stats::StatKind::ustat) {
    stat.ustat_params.m = int(require_number(j, path, "m"));
    stat.ustat_params.m_lo = int(require_number(j, path, "m_lo"));
    stat.ustat_params.m_hi = int(require_number(j, path, "m_hi"));
    const auto& p = stat.ustat_params;
    if (!(1 <= p.m_lo && p.m_lo <= p.m_hi && p.m_hi <= p.m)) {
      schema_error(path, "ustat params must satisfy 1 <= m_lo <= m_hi <= m");
    }
  } else if (stat.kind == stats::StatKind::rank_sum) {
    stat.group_by = require_string(j, path, "group_by");
  }
  return stat;
}

}  // namespace

std::vector<TestOutcome> PlanResult::rejections() const {
  std::vector<TestOutcome> out;
  for (const auto& stage : stages) {
    for (const auto& t : stage) {
      if (t.rejected) out.push_back(t);
    }
  }
  return out;
}

Plan parse_plan(const json& doc) {
  if (!doc.is_object()) schema_error("$", "plan must be an object");
  Plan plan;
  plan.team = require_string(doc, "$", "team");
  plan.budget = require_number(doc, "$", "budget");
  if (!(plan.budget > 0.0 && plan.budget < 1.0)) {
    schema_error("$.budget", "budget must be in (0,1)");
  }
  if (!doc.contains("stages") || !doc["stages"].is_array() || doc["stages"].empty()) {
    schema_error("$.stages", "at least one stage required");
  }
  int si = 0;
  for (const auto& js : doc["stages"]) {
    const std::string spath = "$.stages[" + std::to_string(si++) + "]";
    if (!js.is_object() || !js.contains("tests") || !js["tests"].is_array() ||
        js["tests"].empty()) {
      schema_error(spath, "stage requires a nonempty tests array");
    }
    Stage stage;
    int ti = 0;
    for (const auto& jt : js["tests"]) {
      const std::string tpath = spath + ".tests[" + std::to_string(ti++) + "]";
      PlanTest test;
      test.spec.outcome_name = require_string(jt, tpath, "outcome");
      if (!jt.contains("statistic")) schema_error(tpath, "statistic required");
      test.spec.statistic = parse_statistic(jt["statistic"], tpath + ".statistic");
      const std::string dir = require_string(jt, tpath, "direction");
      try {
        test.spec.direction = stats::direction_from_name(dir);
      } catch (const Error&) {
        schema_error(tpath + ".direction", "must be greater or less");
      }
      test.spec.gamma = require_number(jt, tpath, "gamma");
      if (test.spec.gamma <= 0.0) schema_error(tpath + ".gamma", "must be positive");
      test.alpha = require_number(jt, tpath, "alpha");
      if (test.alpha <= 0.0) schema_error(tpath + ".alpha", "must be > 0");
      if (test.alpha >= 1.0) schema_error(tpath + ".alpha", "must be < 1");
      stage.tests.push_back(std::move(test));
    }
    plan.stages.push_back(std::move(stage));
  }
  return plan;
}

Plan parse_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrCode::schema_violation, "cannot open plan file: " + path);
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrCode::schema_violation,
                "invalid JSON in " + path + ": " + e.what());
  }
  return parse_plan(doc);
}

json plan_to_json(const Plan& plan) {
  ordered_json doc;
  doc["team"] = plan.team;
  doc["budget"] = plan.budget;
  doc["stages"] = json::array();
  for (const Stage& stage : plan.stages) {
    ordered_json js;
    js["tests"] = json::array();
    for (const PlanTest& t : stage.tests) {
      ordered_json jt;
      jt["outcome"] = t.spec.outcome_name;
      ordered_json stat;
      stat["kind"] = stats::stat_kind_name(t.spec.statistic.kind);
      if (t.spec.statistic.kind == stats::StatKind::ustat) {
        stat["m"] = t.spec.statistic.ustat_params.m;
        stat["m_lo"] = t.spec.statistic.ustat_params.m_lo;
        stat["m_hi"] = t.spec.statistic.ustat_params.m_hi;
      } else if (t.spec.statistic.kind == stats::StatKind::rank_sum) {
        stat["group_by"] = t.spec.statistic.group_by;
      }
      jt["statistic"] = stat;
      jt["direction"] = stats::direction_name(t.spec.direction);
      jt["gamma"] = t.spec.gamma;
      jt["alpha"] = t.alpha;
      js["tests"].push_back(jt);
    }
    doc["stages"].push_back(js);
  }
  return doc;
}

std::vector<std::string> validate_plan(const Plan& plan) {
  std::vector<std::string> violations;
  if (!(plan.budget > 0.0 && plan.budget < 1.0)) {
    violations.push_back("budget must lie in (0,1)");
  }
  for (std::size_t si = 0; si < plan.stages.size(); ++si) {
    const Stage& stage = plan.stages[si];
    double sum = 0.0;
    std::set<std::string> seen;
    for (const PlanTest& t : stage.tests) {
      sum += t.alpha;
      if (t.spec.gamma < 1.0) {
        violations.push_back("stage " + std::to_string(si + 1) + ": test on " +
                             t.spec.outcome_name + " has gamma < 1");
      }
      const std::string key = t.spec.outcome_name + "|" +
                              stats::direction_name(t.spec.direction) + "|" +
                              format_double(t.spec.gamma);
      if (!seen.insert(key).second) {
        violations.push_back("stage " + std::to_string(si + 1) +
                             ": duplicate test (" + key + ")");
      }
    }
    if (sum > plan.budget + 1e-12) {
      violations.push_back("stage " + std::to_string(si + 1) + " sum " +
                           format_double(sum) + " > " +
                           format_double(plan.budget));
    }
  }
  return violations;
}

PlanResult execute_plan_with(const Plan& plan, const TestEvaluator& evaluate) {
  PlanResult result;
  result.team = plan.team;
  result.budget = plan.budget;
  for (std::size_t si = 0; si < plan.stages.size(); ++si) {
    std::vector<TestOutcome> outcomes;
    bool all_rejected = true;
    for (std::size_t ti = 0; ti < plan.stages[si].tests.size(); ++ti) {
      const PlanTest& test = plan.stages[si].tests[ti];
      TestOutcome out;
      out.spec = test.spec;
      out.alpha = test.alpha;
      const auto [p, approx] = evaluate(test, int(si), int(ti));
      out.p_value = p;
      out.approximate = approx;
      out.rejected = p < test.alpha;
      all_rejected = all_rejected && out.rejected;
      outcomes.push_back(std::move(out));
    }
    result.stages.push_back(std::move(outcomes));
    if (!all_rejected) {
      result.stopped_at_stage = int(si + 1);
      // Later stages are recorded with no p-values: never computed.
      for (std::size_t rest = si + 1; rest < plan.stages.size(); ++rest) {
        std::vector<TestOutcome> untested;
        for (const PlanTest& test : plan.stages[rest].tests) {
          TestOutcome out;
          out.spec = test.spec;
          out.alpha = test.alpha;
          untested.push_back(std::move(out));
        }
        result.stages.push_back(std::move(untested));
      }
      break;
    }
  }
  return result;
}

PlanResult execute_plan(const Plan& plan, const paired::PairTable& data,
                        const ExecOptions& options) {
  TestEvaluator evaluate = [&](const PlanTest& test, int stage_idx,
                               int test_idx) -> std::pair<double, bool> {
    try {
      if (test.spec.statistic.kind == stats::StatKind::rank_sum) {
        const auto [group_a, group_b] = data.modifier_groups(
            test.spec.outcome_name, test.spec.statistic.group_by);
        if (test.spec.gamma == 1.0) {
          return {stats::rank_sum(group_a, group_b, test.spec.direction), false};
        }
        const std::uint64_t seed = substream_seed(
            options.seed, std::uint64_t(stage_idx), std::uint64_t(test_idx));
        return {stats::rank_sum_worst_case(group_a, group_b, test.spec.gamma,
                                           test.spec.direction, seed,
                                           options.mc_draws),
                true};
      }
      if (!data.has_outcome(test.spec.outcome_name)) {
        throw Error(ErrCode::missing_outcome,
                    "outcome not in paired data: " + test.spec.outcome_name);
      }
      const stats::PairedOutcome po = data.paired_outcome(test.spec.outcome_name);
      return {stats::run_test(po, test.spec).p_upper, false};
    } catch (const Error& e) {
      throw Error(e.code(), "stage " + std::to_string(stage_idx + 1) +
                                ", test " + std::to_string(test_idx + 1) +
                                " (" + test.spec.outcome_name + "): " + e.what());
    }
  };
  return execute_plan_with(plan, evaluate);
}

std::string plan_hash(const Plan& plan) {
  return fnv1a64_hex(plan_to_json(plan).dump());
}

bool needs_monte_carlo(const Plan& plan) {
  for (const Stage& stage : plan.stages) {
    for (const PlanTest& t : stage.tests) {
      if (t.spec.statistic.kind == stats::StatKind::rank_sum && t.spec.gamma > 1.0) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace xscreen::plan
