#include "xscreen/screen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "xscreen/mathutil.hpp"
#include "xscreen/rng.hpp"
#include "xscreen/version.hpp"

namespace xscreen::screen {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<Finding> rejection_findings(const plan::PlanResult& result) {
  std::set<Finding> set;
  for (const auto& t : result.rejections()) {
    set.insert({t.spec.outcome_name, t.spec.direction});
  }
  return {set.begin(), set.end()};
}

json findings_to_json(const std::vector<Finding>& findings) {
  json arr = json::array();
  for (const Finding& f : findings) {
    ordered_json j;
    j["outcome"] = f.outcome;
    j["direction"] = stats::direction_name(f.direction);
    arr.push_back(j);
  }
  return arr;
}

json plan_result_to_json(const plan::PlanResult& result) {
  ordered_json doc;
  doc["team"] = result.team;
  doc["budget"] = result.budget;
  if (result.stopped_at_stage) doc["stopped_at_stage"] = *result.stopped_at_stage;
  else doc["stopped_at_stage"] = "completed";
  doc["stages"] = json::array();
  for (const auto& stage : result.stages) {
    json jstage = json::array();
    for (const auto& t : stage) {
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
      if (t.p_value) jt["p_value"] = *t.p_value;
      jt["rejected"] = t.rejected;
      if (t.approximate) jt["approximate"] = true;
      jstage.push_back(jt);
    }
    doc["stages"].push_back(jstage);
  }
  return doc;
}

}  // namespace

std::vector<Finding> FindingsReport::global_null_findings() const {
  std::set<Finding> set;
  for (const auto& e : executions) {
    set.insert(e.rejections.begin(), e.rejections.end());
  }
  return {set.begin(), set.end()};
}

std::vector<Finding> FindingsReport::replicable_findings() const {
  if (executions.empty()) return {};
  std::set<Finding> common(executions[0].rejections.begin(),
                           executions[0].rejections.end());
  for (std::size_t i = 1; i < executions.size(); ++i) {
    std::set<Finding> next(executions[i].rejections.begin(),
                           executions[i].rejections.end());
    std::set<Finding> kept;
    for (const Finding& f : common) {
      if (next.count(f)) kept.insert(f);
    }
    common = std::move(kept);
  }
  return {common.begin(), common.end()};
}

std::map<Finding, std::vector<std::string>> FindingsReport::rejecting_parts() const {
  std::map<Finding, std::vector<std::string>> out;
  for (const auto& e : executions) {
    for (const Finding& f : e.rejections) {
      out[f].push_back(e.target_part);
    }
  }
  for (auto& [f, parts] : out) std::sort(parts.begin(), parts.end());
  return out;
}

FindingsReport run_two_team(const plan::Plan& plan_a, const plan::Plan& plan_b,
                            const Part& part_a, const Part& part_b,
                            double alpha_total, const plan::ExecOptions& options) {
  if (plan_a.budget + plan_b.budget > alpha_total + 1e-12) {
    throw Error(ErrCode::budget_exceeded,
                "plan budgets " + format_double(plan_a.budget) + " + " +
                    format_double(plan_b.budget) + " exceed " +
                    format_double(alpha_total));
  }
  FindingsReport report;
  report.alpha_total = alpha_total;

  PlanExecution exec_a;
  exec_a.team = plan_a.team;
  exec_a.target_part = part_b.label;  // cross application
  exec_a.result = plan::execute_plan(plan_a, part_b.data, options);
  exec_a.rejections = rejection_findings(exec_a.result);
  report.executions.push_back(std::move(exec_a));

  PlanExecution exec_b;
  exec_b.team = plan_b.team;
  exec_b.target_part = part_a.label;
  exec_b.result = plan::execute_plan(plan_b, part_a.data, options);
  exec_b.rejections = rejection_findings(exec_b.result);
  report.executions.push_back(std::move(exec_b));

  report.provenance.plan_hashes[plan_a.team.empty() ? "A" : plan_a.team] =
      plan::plan_hash(plan_a);
  report.provenance.plan_hashes[plan_b.team.empty() ? "B" : plan_b.team] =
      plan::plan_hash(plan_b);
  report.provenance.dataset_digest =
      paired::digest(part_a.data) + ":" + paired::digest(part_b.data);
  report.provenance.seed = options.seed;
  report.provenance.toolkit_version = kVersion;
  return report;
}

namespace {

struct Screened {
  Finding finding;
  double screen_p = 1.0;
};

/// Two one-sided screening p-values per outcome; keep the smaller side when
/// it beats the threshold. Screening is selection, not inference: no
/// multiplicity adjustment here.
std::vector<Screened> screen_outcomes(const AutomatedConfig& config,
                                      const paired::PairTable& data) {
  std::vector<Screened> selected;
  for (const std::string& outcome : config.outcomes) {
    const stats::PairedOutcome po = data.paired_outcome(outcome);
    stats::TestSpec spec;
    spec.outcome_name = outcome;
    spec.statistic = config.screen_statistic;
    spec.gamma = config.gamma;
    spec.direction = stats::Direction::greater;
    const double p_greater = stats::run_test(po, spec).p_upper;
    spec.direction = stats::Direction::less;
    const double p_less = stats::run_test(po, spec).p_upper;
    Screened s;
    s.finding.outcome = outcome;
    s.finding.direction = p_greater <= p_less ? stats::Direction::greater
                                              : stats::Direction::less;
    s.screen_p = std::min(p_greater, p_less);
    if (s.screen_p < config.screen_threshold) selected.push_back(s);
  }
  return selected;
}

PlanExecution test_selected(const AutomatedConfig& config,
                            const std::vector<Screened>& selected,
                            const Part& test_part, const std::string& team) {
  PlanExecution exec;
  exec.team = team;
  exec.target_part = test_part.label;
  exec.result.team = team;
  exec.result.budget = config.test_level;

  std::vector<double> pvals;
  std::vector<plan::TestOutcome> outcomes;
  for (const Screened& s : selected) {
    stats::TestSpec spec;
    spec.outcome_name = s.finding.outcome;
    spec.statistic = config.screen_statistic;
    spec.direction = s.finding.direction;
    spec.gamma = config.gamma;
    const stats::PairedOutcome po = test_part.data.paired_outcome(s.finding.outcome);
    plan::TestOutcome out;
    out.spec = spec;
    out.alpha = config.test_level;
    out.p_value = stats::run_test(po, spec).p_upper;
    pvals.push_back(*out.p_value);
    outcomes.push_back(std::move(out));
  }
  for (std::size_t idx : holm_adjust(pvals, config.test_level)) {
    outcomes[idx].rejected = true;
    exec.rejections.push_back(
        {outcomes[idx].spec.outcome_name, outcomes[idx].spec.direction});
  }
  std::sort(exec.rejections.begin(), exec.rejections.end());
  if (!outcomes.empty()) exec.result.stages.push_back(std::move(outcomes));
  return exec;
}

}  // namespace

FindingsReport run_automated(const AutomatedConfig& config, const Part& part_1,
                             const Part& part_2) {
  if (config.outcomes.empty()) {
    throw Error(ErrCode::no_outcomes, "automated cross-screening needs outcomes");
  }
  if (!(config.screen_threshold >= 0.0 && config.screen_threshold < 1.0) ||
      !(config.test_level > 0.0 && config.test_level < 1.0)) {
    throw Error(ErrCode::bad_params, "thresholds must lie in (0,1)");
  }
  FindingsReport report;
  report.alpha_total = 2.0 * config.test_level;
  report.executions.push_back(test_selected(
      config, screen_outcomes(config, part_1.data), part_2, "screen:" + part_1.label));
  report.executions.push_back(test_selected(
      config, screen_outcomes(config, part_2.data), part_1, "screen:" + part_2.label));
  report.provenance.dataset_digest =
      paired::digest(part_1.data) + ":" + paired::digest(part_2.data);
  report.provenance.toolkit_version = kVersion;
  report.provenance.notes.push_back("automated cross-screening at threshold " +
                                    format_double(config.screen_threshold));
  return report;
}

std::vector<std::size_t> holm_adjust(const std::vector<double>& pvals, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrCode::bad_p, "alpha must lie in (0,1)");
  }
  for (double p : pvals) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrCode::bad_p, "p-value outside [0,1]: " + format_double(p));
    }
  }
  const std::size_t n = pvals.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
  std::vector<std::size_t> rejected;
  for (std::size_t k = 0; k < n; ++k) {
    const double threshold = alpha / double(n - k);
    if (pvals[order[k]] < threshold) rejected.push_back(order[k]);
    else break;
  }
  std::sort(rejected.begin(), rejected.end());
  return rejected;
}

std::vector<Finding> run_holm_full(const std::vector<std::string>& outcomes,
                                   const paired::PairTable& full_data,
                                   double alpha, const stats::Statistic& statistic,
                                   double gamma) {
  if (outcomes.empty()) {
    throw Error(ErrCode::no_outcomes, "holm-full needs outcomes");
  }
  std::vector<Finding> family;
  std::vector<double> pvals;
  for (const std::string& outcome : outcomes) {
    const stats::PairedOutcome po = full_data.paired_outcome(outcome);
    for (stats::Direction dir : {stats::Direction::greater, stats::Direction::less}) {
      stats::TestSpec spec;
      spec.outcome_name = outcome;
      spec.statistic = statistic;
      spec.direction = dir;
      spec.gamma = gamma;
      family.push_back({outcome, dir});
      pvals.push_back(stats::run_test(po, spec).p_upper);
    }
  }
  std::vector<Finding> findings;
  for (std::size_t idx : holm_adjust(pvals, alpha)) findings.push_back(family[idx]);
  std::sort(findings.begin(), findings.end());
  return findings;
}

FindingsReport run_multi_split(const MultiSplitConfig& config,
                               const std::map<std::string, paired::PairTable>& parts,
                               const plan::ExecOptions& options) {
  double budget_sum = 0.0;
  for (const PlanAssignment& a : config.assignments) {
    budget_sum += a.plan.budget;
    for (const std::string& explore : a.explore_parts) {
      if (explore == a.target_part) {
        throw Error(ErrCode::overlap_violation,
                    "plan '" + a.plan.team + "' explores its own target part " +
                        a.target_part);
      }
    }
    if (!parts.count(a.target_part)) {
      throw Error(ErrCode::bad_params, "unknown target part: " + a.target_part);
    }
  }
  if (budget_sum > config.total_alpha + 1e-12) {
    throw Error(ErrCode::budget_exceeded,
                "plan budgets sum to " + format_double(budget_sum) +
                    " > total alpha " + format_double(config.total_alpha));
  }

  FindingsReport report;
  report.alpha_total = config.total_alpha;
  std::string digest;
  for (const auto& [label, table] : parts) {
    if (!digest.empty()) digest += ":";
    digest += paired::digest(table);
  }
  report.provenance.dataset_digest = digest;
  report.provenance.seed = options.seed;
  report.provenance.toolkit_version = kVersion;

  int plan_index = 0;
  for (const PlanAssignment& a : config.assignments) {
    plan::ExecOptions opt = options;
    opt.seed = substream_seed(options.seed, std::uint64_t(plan_index));
    PlanExecution exec;
    exec.team = a.plan.team;
    exec.target_part = a.target_part;
    exec.result = plan::execute_plan(a.plan, parts.at(a.target_part), opt);
    exec.rejections = rejection_findings(exec.result);
    report.executions.push_back(std::move(exec));
    report.provenance.plan_hashes[a.plan.team.empty()
                                      ? "plan" + std::to_string(plan_index + 1)
                                      : a.plan.team] = plan::plan_hash(a.plan);
    ++plan_index;
  }
  return report;
}

MultiSplitConfig parse_multi_split_config(const json& doc,
                                          const std::string& base_dir) {
  if (!doc.is_object()) {
    throw Error(ErrCode::schema_violation, "multi-split config must be an object");
  }
  MultiSplitConfig config;
  if (doc.contains("total_alpha")) config.total_alpha = doc["total_alpha"].get<double>();
  if (doc.contains("parts")) {
    for (const auto& p : doc["parts"]) config.parts.push_back(p.get<std::string>());
  }
  if (!doc.contains("plans") || !doc["plans"].is_array() || doc["plans"].empty()) {
    throw Error(ErrCode::schema_violation, "multi-split config requires plans[]");
  }
  for (const auto& jp : doc["plans"]) {
    PlanAssignment a;
    if (!jp.contains("target") || !jp["target"].is_string()) {
      throw Error(ErrCode::schema_violation, "plan assignment requires target");
    }
    a.target_part = jp["target"].get<std::string>();
    if (jp.contains("explore")) {
      for (const auto& e : jp["explore"]) a.explore_parts.push_back(e.get<std::string>());
    }
    if (jp.contains("plan_file")) {
      std::string path = jp["plan_file"].get<std::string>();
      if (!path.empty() && path[0] != '/' && !base_dir.empty()) {
        path = base_dir + "/" + path;
      }
      a.plan = plan::parse_plan_file(path);
    } else if (jp.contains("plan")) {
      a.plan = plan::parse_plan(jp["plan"]);
    } else {
      throw Error(ErrCode::schema_violation,
                  "plan assignment requires plan or plan_file");
    }
    config.assignments.push_back(std::move(a));
  }
  return config;
}

json report_to_json(const FindingsReport& report) {
  ordered_json doc;
  ordered_json parts = ordered_json::object();
  for (const auto& e : report.executions) {
    ordered_json entry;
    entry["team"] = e.team;
    entry["target_part"] = e.target_part;
    entry["result"] = plan_result_to_json(e.result);
    entry["rejections"] = findings_to_json(e.rejections);
    // Key by target part; collisions (several plans on one part) get suffixes.
    std::string key = e.target_part;
    int suffix = 2;
    while (parts.contains(key)) key = e.target_part + "#" + std::to_string(suffix++);
    parts[key] = entry;
  }
  doc["parts"] = parts;
  if (report.executions.size() == 2) {
    doc["R1"] = findings_to_json(report.r1());
    doc["R2"] = findings_to_json(report.r2());
  }
  doc["global"] = findings_to_json(report.global_null_findings());
  doc["replicable"] = findings_to_json(report.replicable_findings());
  if (report.executions.size() > 2) {
    ordered_json by_outcome = ordered_json::object();
    for (const auto& [finding, labels] : report.rejecting_parts()) {
      by_outcome[finding.outcome + ":" +
                 stats::direction_name(finding.direction)] = labels;
    }
    doc["rejecting_parts"] = by_outcome;
  }
  doc["alpha_total"] = report.alpha_total;
  ordered_json prov;
  ordered_json hashes = ordered_json::object();
  for (const auto& [team, hash] : report.provenance.plan_hashes) hashes[team] = hash;
  prov["plan_hashes"] = hashes;
  prov["dataset_digest"] = report.provenance.dataset_digest;
  prov["seed"] = report.provenance.seed;
  prov["toolkit_version"] = report.provenance.toolkit_version;
  if (!report.provenance.notes.empty()) prov["notes"] = report.provenance.notes;
  doc["provenance"] = prov;
  return doc;
}

std::string report_to_text(const FindingsReport& report) {
  std::ostringstream out;
  auto print_findings = [&](const char* title, const std::vector<Finding>& fs) {
    out << title << ":";
    if (fs.empty()) out << " (none)";
    for (const Finding& f : fs) {
      out << " " << f.outcome << "[" << stats::direction_name(f.direction) << "]";
    }
    out << "\n";
  };
  for (const auto& e : report.executions) {
    out << "plan '" << e.team << "' on part '" << e.target_part << "': ";
    if (e.result.stopped_at_stage) {
      out << "stopped at stage " << *e.result.stopped_at_stage;
    } else {
      out << "completed";
    }
    out << ", " << e.rejections.size() << " rejection(s)\n";
    for (const auto& stage : e.result.stages) {
      for (const auto& t : stage) {
        out << "  " << t.spec.outcome_name << " ["
            << stats::direction_name(t.spec.direction)
            << ", gamma=" << format_double(t.spec.gamma) << "] alpha="
            << format_double(t.alpha);
        if (t.p_value) {
          out << " p=" << format_double(*t.p_value)
              << (t.rejected ? " REJECTED" : " retained");
          if (t.approximate) out << " (approximate)";
        } else {
          out << " (not tested)";
        }
        out << "\n";
      }
    }
  }
  print_findings("global null findings (union)", report.global_null_findings());
  print_findings("replicable findings (intersection)", report.replicable_findings());
  out << "alpha_total: " << format_double(report.alpha_total) << "\n";
  return out.str();
}

}  // namespace xscreen::screen
