#include "xscreen/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "xscreen/csv.hpp"
#include "xscreen/mathutil.hpp"
#include "xscreen/rng.hpp"

namespace xscreen::sim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const char* kProxyNote =
    "team proxies emulate the automated screening rule; human exploratory "
    "analysis is not simulated";

}  // namespace

void validate_scenario(const Scenario& s) {
  if (s.parts.empty()) throw Error(ErrCode::bad_scenario, "no parts");
  std::set<std::string> labels;
  for (const PartSpec& p : s.parts) {
    if (p.pairs < 2) {
      throw Error(ErrCode::bad_scenario,
                  "part " + p.label + " needs at least 2 pairs");
    }
    if (p.label.empty() || !labels.insert(p.label).second) {
      throw Error(ErrCode::bad_scenario, "part labels must be unique and nonempty");
    }
  }
  if (s.outcomes.empty()) throw Error(ErrCode::bad_scenario, "no outcomes");
  if (s.effects.size() != s.parts.size()) {
    throw Error(ErrCode::bad_scenario, "effects must have one row per part");
  }
  for (const auto& row : s.effects) {
    if (row.size() != s.outcomes.size()) {
      throw Error(ErrCode::bad_scenario, "effects row width != outcome count");
    }
  }
  if (!(s.rho >= 0.0 && s.rho < 1.0)) {
    throw Error(ErrCode::bad_scenario, "rho must lie in [0,1)");
  }
  if (s.noise.kind == Noise::Kind::student_t && s.noise.df < 1) {
    throw Error(ErrCode::bad_scenario, "t noise requires integer df >= 1");
  }
  if (s.replications < 1) throw Error(ErrCode::bad_scenario, "replications >= 1");
}

Scenario scenario_from_json(const json& doc) {
  Scenario s;
  if (!doc.is_object()) throw Error(ErrCode::bad_scenario, "scenario must be an object");
  if (!doc.contains("parts") || !doc["parts"].is_array()) {
    throw Error(ErrCode::bad_scenario, "scenario requires parts[]");
  }
  for (const auto& jp : doc["parts"]) {
    PartSpec p;
    p.label = jp.value("label", "");
    p.pairs = jp.value("pairs", 0);
    s.parts.push_back(p);
  }
  if (doc.contains("outcomes")) {
    for (const auto& o : doc["outcomes"]) s.outcomes.push_back(o.get<std::string>());
  }
  if (doc.contains("effects")) {
    for (const auto& row : doc["effects"]) {
      s.effects.push_back(row.get<std::vector<double>>());
    }
  } else {
    s.effects.assign(s.parts.size(), std::vector<double>(s.outcomes.size(), 0.0));
  }
  s.rho = doc.value("rho", 0.0);
  if (doc.contains("noise")) {
    const std::string kind = doc["noise"].value("kind", "normal");
    if (kind == "normal") s.noise.kind = Noise::Kind::normal;
    else if (kind == "t") {
      s.noise.kind = Noise::Kind::student_t;
      s.noise.df = doc["noise"].value("df", 5);
    } else {
      throw Error(ErrCode::bad_scenario, "noise kind must be normal or t");
    }
  }
  s.replications = doc.value("replications", 1000);
  s.seed = doc.value("seed", std::uint64_t{0});
  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrCode::bad_scenario, "cannot open scenario file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrCode::bad_scenario,
                "invalid JSON in " + path + ": " + e.what());
  }
  return scenario_from_json(doc);
}

std::map<std::string, paired::PairTable> generate(const Scenario& scenario,
                                                  int rep_index) {
  validate_scenario(scenario);
  std::map<std::string, paired::PairTable> parts;
  const std::size_t n_out = scenario.outcomes.size();
  for (std::size_t k = 0; k < scenario.parts.size(); ++k) {
    const PartSpec& part = scenario.parts[k];
    Rng rng(substream_seed(scenario.seed, std::uint64_t(rep_index), k));
    paired::PairTable table;
    table.outcome_order = scenario.outcomes;
    for (const auto& name : scenario.outcomes) {
      table.outcomes[name].reserve(std::size_t(part.pairs));
    }
    for (int i = 0; i < part.pairs; ++i) {
      table.pair_ids.push_back(part.label + "-" + std::to_string(i + 1));
      table.split.push_back(part.label);
      const double shared = rng.normal();
      std::vector<double> indiv(n_out);
      for (std::size_t j = 0; j < n_out; ++j) indiv[j] = rng.normal();
      double divisor = 1.0;
      if (scenario.noise.kind == Noise::Kind::student_t) {
        divisor = std::sqrt(rng.chi_square(scenario.noise.df) /
                            double(scenario.noise.df));
      }
      for (std::size_t j = 0; j < n_out; ++j) {
        const double z = std::sqrt(scenario.rho) * shared +
                         std::sqrt(1.0 - scenario.rho) * indiv[j];
        table.outcomes[scenario.outcomes[j]].push_back(
            scenario.effects[k][j] + z / divisor);
      }
    }
    parts.emplace(part.label, std::move(table));
  }
  return parts;
}

plan::Plan proxy_build_plan(const TeamProxy& proxy,
                            const paired::PairTable& explore_data,
                            const std::vector<std::string>& outcomes,
                            double budget, const std::string& team) {
  struct Pick {
    double p;
    std::string outcome;
    stats::Direction direction;
  };
  std::vector<Pick> picks;
  for (const std::string& outcome : outcomes) {
    const stats::PairedOutcome po = explore_data.paired_outcome(outcome);
    stats::TestSpec spec;
    spec.outcome_name = outcome;
    spec.statistic = proxy.screen_statistic;
    spec.gamma = 1.0;
    spec.direction = stats::Direction::greater;
    const double p_greater = stats::run_test(po, spec).p_upper;
    spec.direction = stats::Direction::less;
    const double p_less = stats::run_test(po, spec).p_upper;
    Pick pick;
    pick.outcome = outcome;
    pick.direction = p_greater <= p_less ? stats::Direction::greater
                                         : stats::Direction::less;
    pick.p = std::min(p_greater, p_less);
    if (pick.p < proxy.screen_threshold) picks.push_back(std::move(pick));
  }
  std::sort(picks.begin(), picks.end(), [](const Pick& a, const Pick& b) {
    if (a.p != b.p) return a.p < b.p;
    return a.outcome < b.outcome;
  });
  if (int(picks.size()) > proxy.max_tests) picks.resize(std::size_t(proxy.max_tests));

  plan::Plan plan;
  plan.team = team;
  plan.budget = budget;
  if (picks.empty()) return plan;  // nothing screened in: empty plan

  auto make_test = [&](const Pick& pick, double alpha) {
    plan::PlanTest test;
    test.spec.outcome_name = pick.outcome;
    test.spec.statistic = proxy.screen_statistic;
    test.spec.direction = pick.direction;
    test.spec.gamma = 1.0;
    test.alpha = alpha;
    return test;
  };
  if (proxy.builder == TeamProxy::Builder::fixed_sequence_by_p) {
    for (const Pick& pick : picks) {
      plan::Stage stage;
      stage.tests.push_back(make_test(pick, budget));
      plan.stages.push_back(std::move(stage));
    }
  } else {
    plan::Stage stage;
    const double alpha = budget / double(picks.size());
    for (const Pick& pick : picks) stage.tests.push_back(make_test(pick, alpha));
    plan.stages.push_back(std::move(stage));
  }
  return plan;
}

std::string method_name(const MethodConfig& config) {
  switch (config.kind) {
    case MethodKind::two_team: return "two-team";
    case MethodKind::automated: return "automated";
    case MethodKind::holm_full: return "holm-full";
    case MethodKind::multi_split: return "multi-split";
    case MethodKind::single_split: return "single-split";
    case MethodKind::three_team_naive_union: return "three-team-naive-union";
    case MethodKind::three_team_leave_one_out: return "three-team-leave-one-out";
    case MethodKind::split_202060: return "split-20-20-60";
  }
  return "?";
}

MethodKind method_kind_from_name(const std::string& name) {
  if (name == "two-team") return MethodKind::two_team;
  if (name == "automated") return MethodKind::automated;
  if (name == "holm-full") return MethodKind::holm_full;
  if (name == "multi-split") return MethodKind::multi_split;
  if (name == "single-split") return MethodKind::single_split;
  if (name == "three-team-naive-union") return MethodKind::three_team_naive_union;
  if (name == "three-team-leave-one-out") return MethodKind::three_team_leave_one_out;
  if (name == "split-20-20-60") return MethodKind::split_202060;
  throw Error(ErrCode::bad_params, "unknown method: " + name);
}

namespace {

Rate make_rate(long long count, long long reps) {
  Rate r;
  if (reps > 0) {
    r.value = double(count) / double(reps);
    r.mc_se = std::sqrt(r.value * (1.0 - r.value) / double(reps));
  }
  return r;
}

/// Rejections of one execution: target label plus the finding set.
struct ExecRejections {
  std::string part;
  std::vector<screen::Finding> findings;
};

/// Per-replication outcome of one method.
struct RepOutcome {
  std::vector<ExecRejections> executions;
};

struct NullInfo {
  // outcome -> is globally null; outcome -> null in at least one part
  std::map<std::string, bool> global_null;
  std::map<std::string, bool> null_somewhere;
};

NullInfo null_info(const Scenario& scenario) {
  NullInfo info;
  for (std::size_t j = 0; j < scenario.outcomes.size(); ++j) {
    bool all_zero = true;
    bool any_zero = false;
    for (std::size_t k = 0; k < scenario.parts.size(); ++k) {
      if (scenario.effects[k][j] == 0.0) any_zero = true;
      else all_zero = false;
    }
    info.global_null[scenario.outcomes[j]] = all_zero;
    info.null_somewhere[scenario.outcomes[j]] = any_zero;
  }
  return info;
}

ExecRejections exec_to_rejections(const std::string& part,
                                  const plan::PlanResult& result) {
  ExecRejections er;
  er.part = part;
  std::set<screen::Finding> set;
  for (const auto& t : result.rejections()) {
    set.insert({t.spec.outcome_name, t.spec.direction});
  }
  er.findings.assign(set.begin(), set.end());
  return er;
}

paired::PairTable pool_parts(const std::map<std::string, paired::PairTable>& parts) {
  paired::PairTable pooled;
  bool first = true;
  for (const auto& [label, table] : parts) {
    if (first) {
      pooled = table;
      first = false;
    } else {
      pooled.append(table);
    }
  }
  return pooled;
}

/// Deterministic row split of a pooled table by fractions.
std::vector<paired::PairTable> random_row_split(const paired::PairTable& pooled,
                                                const std::vector<double>& fractions,
                                                std::uint64_t seed) {
  const std::size_t n = pooled.n();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::size_t> sizes(fractions.size());
  std::size_t assigned = 0;
  std::vector<std::pair<double, std::size_t>> remainders;
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

  std::vector<paired::PairTable> out;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    paired::PairTable t;
    t.outcome_order = pooled.outcome_order;
    t.modifier_order = pooled.modifier_order;
    for (const auto& name : t.outcome_order) t.outcomes[name] = {};
    for (const auto& name : t.modifier_order) t.modifiers[name] = {};
    for (std::size_t i = 0; i < sizes[k]; ++i, ++pos) {
      const std::size_t row = order[pos];
      t.pair_ids.push_back(pooled.pair_ids[row]);
      if (!pooled.split.empty()) t.split.push_back(pooled.split[row]);
      for (const auto& name : t.outcome_order) {
        t.outcomes[name].push_back(pooled.outcomes.at(name)[row]);
      }
      for (const auto& name : t.modifier_order) {
        t.modifiers[name].push_back(pooled.modifiers.at(name)[row]);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

const TeamProxy& proxy_for(const std::vector<TeamProxy>& proxies, std::size_t i) {
  static const TeamProxy default_proxy;
  if (proxies.empty()) return default_proxy;
  return proxies[i % proxies.size()];
}

RepOutcome run_method_once(const Scenario& scenario, const MethodConfig& config,
                           const std::vector<TeamProxy>& proxies,
                           const std::map<std::string, paired::PairTable>& data,
                           int rep) {
  RepOutcome out;
  const std::vector<std::string>& outcomes = scenario.outcomes;
  std::vector<std::string> labels;
  for (const PartSpec& p : scenario.parts) labels.push_back(p.label);

  switch (config.kind) {
    case MethodKind::two_team: {
      if (labels.size() < 2) {
        throw Error(ErrCode::bad_scenario, "two-team needs at least 2 parts");
      }
      const auto& a = data.at(labels[0]);
      const auto& b = data.at(labels[1]);
      const plan::Plan plan_a = proxy_build_plan(proxy_for(proxies, 0), a,
                                                 outcomes, config.alpha / 2, "A");
      const plan::Plan plan_b = proxy_build_plan(proxy_for(proxies, 1), b,
                                                 outcomes, config.alpha / 2, "B");
      out.executions.push_back(
          exec_to_rejections(labels[1], plan::execute_plan(plan_a, b)));
      out.executions.push_back(
          exec_to_rejections(labels[0], plan::execute_plan(plan_b, a)));
      break;
    }
    case MethodKind::automated: {
      if (labels.size() < 2) {
        throw Error(ErrCode::bad_scenario, "automated needs at least 2 parts");
      }
      screen::AutomatedConfig ac;
      ac.outcomes = outcomes;
      ac.screen_threshold = config.alpha / 2;
      ac.test_level = config.alpha / 2;
      const screen::FindingsReport report =
          screen::run_automated(ac, {labels[0], data.at(labels[0])},
                                {labels[1], data.at(labels[1])});
      for (const auto& e : report.executions) {
        out.executions.push_back({e.target_part, e.rejections});
      }
      break;
    }
    case MethodKind::holm_full: {
      const paired::PairTable pooled = pool_parts(data);
      ExecRejections er;
      er.part = "full";
      er.findings = screen::run_holm_full(outcomes, pooled, config.alpha,
                                          stats::Statistic{}, 1.0);
      out.executions.push_back(std::move(er));
      break;
    }
    case MethodKind::multi_split: {
      // Each part's plan is built on the pooled remaining parts (the
      // K-team generalization of cross-screening).
      const double budget = config.alpha / double(labels.size());
      for (std::size_t k = 0; k < labels.size(); ++k) {
        std::map<std::string, paired::PairTable> others;
        for (std::size_t m = 0; m < labels.size(); ++m) {
          if (m != k) others.emplace(labels[m], data.at(labels[m]));
        }
        const paired::PairTable explore = pool_parts(others);
        const plan::Plan p = proxy_build_plan(proxy_for(proxies, k), explore,
                                              outcomes, budget,
                                              "team" + std::to_string(k + 1));
        out.executions.push_back(
            exec_to_rejections(labels[k], plan::execute_plan(p, data.at(labels[k]))));
      }
      break;
    }
    case MethodKind::single_split: {
      const paired::PairTable pooled = pool_parts(data);
      const auto splits = random_row_split(
          pooled, {config.plan_fraction, 1.0 - config.plan_fraction},
          substream_seed(scenario.seed, std::uint64_t(rep), 0x51u));
      const plan::Plan p = proxy_build_plan(proxy_for(proxies, 0), splits[0],
                                            outcomes, config.alpha, "planner");
      out.executions.push_back(
          exec_to_rejections("analysis", plan::execute_plan(p, splits[1])));
      break;
    }
    case MethodKind::three_team_naive_union: {
      if (labels.size() != 3) {
        throw Error(ErrCode::bad_scenario, "three-team methods need 3 parts");
      }
      // Team t explores part t and proposes a plan for each other part; the
      // two proposals per part run side by side at split budgets ("naive
      // union"), 6 plans at alpha/6 in total.
      const double budget = config.alpha / 6.0;
      for (std::size_t t = 0; t < 3; ++t) {
        for (std::size_t p = 0; p < 3; ++p) {
          if (p == t) continue;
          const plan::Plan pl = proxy_build_plan(
              proxy_for(proxies, t), data.at(labels[t]), outcomes, budget,
              "team" + std::to_string(t + 1) + "->" + labels[p]);
          out.executions.push_back(
              exec_to_rejections(labels[p], plan::execute_plan(pl, data.at(labels[p]))));
        }
      }
      break;
    }
    case MethodKind::three_team_leave_one_out: {
      if (labels.size() != 3) {
        throw Error(ErrCode::bad_scenario, "three-team methods need 3 parts");
      }
      const double budget = config.alpha / 3.0;
      for (std::size_t k = 0; k < 3; ++k) {
        std::map<std::string, paired::PairTable> others;
        for (std::size_t m = 0; m < 3; ++m) {
          if (m != k) others.emplace(labels[m], data.at(labels[m]));
        }
        const plan::Plan p =
            proxy_build_plan(proxy_for(proxies, k), pool_parts(others), outcomes,
                             budget, "team" + std::to_string(k + 1));
        out.executions.push_back(
            exec_to_rejections(labels[k], plan::execute_plan(p, data.at(labels[k]))));
      }
      break;
    }
    case MethodKind::split_202060: {
      const paired::PairTable pooled = pool_parts(data);
      const auto splits =
          random_row_split(pooled, {0.2, 0.2, 0.6},
                           substream_seed(scenario.seed, std::uint64_t(rep), 0x2060u));
      paired::PairTable target_a = splits[1];  // team A explores splits[0]
      target_a.append(splits[2]);
      paired::PairTable target_b = splits[0];  // team B explores splits[1]
      target_b.append(splits[2]);
      const plan::Plan plan_a = proxy_build_plan(proxy_for(proxies, 0), splits[0],
                                                 outcomes, config.alpha / 2, "A");
      const plan::Plan plan_b = proxy_build_plan(proxy_for(proxies, 1), splits[1],
                                                 outcomes, config.alpha / 2, "B");
      out.executions.push_back(
          exec_to_rejections("complement-of-1", plan::execute_plan(plan_a, target_a)));
      out.executions.push_back(
          exec_to_rejections("complement-of-2", plan::execute_plan(plan_b, target_b)));
      break;
    }
  }
  return out;
}

void accumulate(MethodMetrics& metrics, const RepOutcome& rep_outcome,
                const NullInfo& nulls) {
  metrics.reps += 1;
  bool any = false;
  bool any_false_global = false;
  for (const auto& er : rep_outcome.executions) {
    for (const screen::Finding& f : er.findings) {
      any = true;
      metrics.rejections[er.part + ":" + f.outcome] += 1;
      if (nulls.global_null.at(f.outcome)) any_false_global = true;
    }
  }
  // Replicable claim: the same finding rejected by two executions with
  // distinct target parts.
  std::set<screen::Finding> replicable;
  for (std::size_t i = 0; i < rep_outcome.executions.size(); ++i) {
    for (std::size_t j = i + 1; j < rep_outcome.executions.size(); ++j) {
      if (rep_outcome.executions[i].part == rep_outcome.executions[j].part) continue;
      for (const screen::Finding& f : rep_outcome.executions[i].findings) {
        const auto& other = rep_outcome.executions[j].findings;
        if (std::find(other.begin(), other.end(), f) != other.end()) {
          replicable.insert(f);
        }
      }
    }
  }
  bool any_false_replicable = false;
  for (const screen::Finding& f : replicable) {
    if (nulls.null_somewhere.at(f.outcome)) any_false_replicable = true;
  }
  metrics.any_rejection += any ? 1 : 0;
  metrics.false_global += any_false_global ? 1 : 0;
  metrics.any_replicable += replicable.empty() ? 0 : 1;
  metrics.false_replicable += any_false_replicable ? 1 : 0;
}

void merge(MethodMetrics& into, const MethodMetrics& from) {
  into.reps += from.reps;
  into.any_rejection += from.any_rejection;
  into.false_global += from.false_global;
  into.any_replicable += from.any_replicable;
  into.false_replicable += from.false_replicable;
  for (const auto& [key, count] : from.rejections) into.rejections[key] += count;
}

}  // namespace

Rate MethodMetrics::fwer() const { return make_rate(false_global, reps); }
Rate MethodMetrics::any_rejection_rate() const { return make_rate(any_rejection, reps); }
Rate MethodMetrics::replicability_rate() const { return make_rate(any_replicable, reps); }
Rate MethodMetrics::false_replicability_rate() const {
  return make_rate(false_replicable, reps);
}

MetricsTable run_comparison(const Scenario& scenario,
                            const std::vector<MethodConfig>& methods,
                            const std::vector<TeamProxy>& proxies, int workers) {
  validate_scenario(scenario);
  if (methods.empty()) throw Error(ErrCode::bad_params, "no methods configured");
  if (workers < 1) workers = 1;
  const NullInfo nulls = null_info(scenario);

  std::vector<std::vector<MethodMetrics>> locals(
      std::size_t(workers), std::vector<MethodMetrics>(methods.size()));

  auto work = [&](int worker) {
    for (int rep = worker; rep < scenario.replications; rep += workers) {
      std::map<std::string, paired::PairTable> data;
      try {
        data = generate(scenario, rep);
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
          const RepOutcome rep_outcome =
              run_method_once(scenario, methods[mi], proxies, data, rep);
          accumulate(locals[std::size_t(worker)][mi], rep_outcome, nulls);
        }
      } catch (const Error& e) {
        throw Error(e.code(),
                    "replication " + std::to_string(rep) + ": " + e.what());
      }
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(std::size_t(workers));
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          work(w);
        } catch (...) {
          errors[std::size_t(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  MetricsTable table;
  table.note = kProxyNote;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    MethodMetrics merged;
    merged.method = method_name(methods[mi]);
    for (int w = 0; w < workers; ++w) merge(merged, locals[std::size_t(w)][mi]);
    table.methods.push_back(std::move(merged));
  }
  return table;
}

std::string metrics_to_csv(const MetricsTable& table) {
  std::string out = "# " + table.note + "\n";
  csv::Table t;
  t.header = {"method", "metric", "value", "mc_se"};
  for (const MethodMetrics& m : table.methods) {
    auto push = [&](const std::string& metric, const Rate& rate) {
      t.rows.push_back({m.method, metric, format_double(rate.value),
                        format_double(rate.mc_se)});
    };
    push("fwer", m.fwer());
    push("any_rejection", m.any_rejection_rate());
    push("replicability", m.replicability_rate());
    push("false_replicability", m.false_replicability_rate());
    for (const auto& [key, count] : m.rejections) {
      push("reject_rate:" + key, make_rate(count, m.reps));
    }
  }
  return out + csv::write_string(t);
}

json metrics_to_json(const MetricsTable& table) {
  ordered_json doc;
  doc["note"] = table.note;
  doc["methods"] = json::array();
  for (const MethodMetrics& m : table.methods) {
    ordered_json jm;
    jm["method"] = m.method;
    jm["replications"] = m.reps;
    auto rate = [](const Rate& r) {
      ordered_json j;
      j["value"] = r.value;
      j["mc_se"] = r.mc_se;
      return j;
    };
    jm["fwer"] = rate(m.fwer());
    jm["any_rejection"] = rate(m.any_rejection_rate());
    jm["replicability"] = rate(m.replicability_rate());
    jm["false_replicability"] = rate(m.false_replicability_rate());
    ordered_json rej = ordered_json::object();
    for (const auto& [key, count] : m.rejections) {
      rej[key] = rate(make_rate(count, m.reps));
    }
    jm["rejection_rates"] = rej;
    doc["methods"].push_back(jm);
  }
  return doc;
}

}  // namespace xscreen::sim
