#include "xscreen/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "xscreen/ci.hpp"
#include "xscreen/core.hpp"
#include "xscreen/jsonvalidate.hpp"
#include "xscreen/match.hpp"
#include "xscreen/mathutil.hpp"
#include "xscreen/paired.hpp"
#include "xscreen/plan.hpp"
#include "xscreen/screen.hpp"
#include "xscreen/sim.hpp"
#include "xscreen/version.hpp"

namespace xscreen::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<std::string> split_list(const std::string& csv_list) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(csv_list);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string resolve_out_path(const std::string& path) {
  if (path.empty() || path[0] == '/') return path;
  const char* dir = std::getenv("XSCREEN_OUT_DIR");
  if (dir && *dir) return std::string(dir) + "/" + path;
  return path;
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  const std::string path = resolve_out_path(out_path);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrCode::bad_usage, "cannot write output file: " + path);
  }
  out << content;
}

void print_seed(std::uint64_t seed) {
  std::cerr << "seed: " << seed << "\n";
}

/// Analysis commands accept either a paired-differences CSV (header `pair`)
/// or a subject CSV (header `treated`) plus --pairs.
paired::PairTable load_analysis_table(const std::string& data_path,
                                      const std::string& pairs_path,
                                      const std::set<std::string>& merge_fallback) {
  std::ifstream probe(data_path);
  if (!probe) {
    throw Error(ErrCode::malformed_row, "cannot open file: " + data_path);
  }
  std::string header;
  std::getline(probe, header);
  probe.close();
  const bool subject_mode = header.rfind("id,", 0) == 0 ||
                            header.find(",treated") != std::string::npos;
  if (subject_mode) {
    if (pairs_path.empty()) {
      throw Error(ErrCode::bad_usage,
                  "subject CSV input requires --pairs (a matched-pairs file)");
    }
    core::IngestOptions opts;
    opts.merge_fallback = merge_fallback;
    const core::Dataset ds = core::ingest(data_path, opts);
    return match::build_pair_table(ds, match::load_pairs(pairs_path));
  }
  if (!pairs_path.empty()) {
    throw Error(ErrCode::bad_usage,
                "--pairs applies only to subject CSV input");
  }
  return paired::load_pair_table(data_path);
}

stats::Statistic statistic_from_flags(const std::string& stat_name, int m,
                                      int m_lo, int m_hi,
                                      const std::string& group_by) {
  stats::Statistic stat;
  stat.kind = stats::stat_kind_from_name(stat_name);
  if (stat.kind == stats::StatKind::ustat) {
    stat.ustat_params = {m, m_lo, m_hi};
  } else if (stat.kind == stats::StatKind::rank_sum) {
    if (group_by.empty()) {
      throw Error(ErrCode::bad_usage, "rank_sum requires --group-by");
    }
    stat.group_by = group_by;
  }
  return stat;
}

std::pair<screen::Part, screen::Part> two_parts(const paired::PairTable& table,
                                                std::string label_a,
                                                std::string label_b) {
  const std::vector<std::string> levels = table.split_levels();
  if (label_a.empty() && label_b.empty()) {
    if (levels.size() != 2) {
      throw Error(ErrCode::bad_usage,
                  "data has " + std::to_string(levels.size()) +
                      " split levels; name two with --part-a/--part-b");
    }
    label_a = levels[0];
    label_b = levels[1];
  }
  if (label_a.empty() || label_b.empty() || label_a == label_b) {
    throw Error(ErrCode::bad_usage, "--part-a and --part-b must name two levels");
  }
  screen::Part part_a{label_a, table.filter_split(label_a)};
  screen::Part part_b{label_b, table.filter_split(label_b)};
  if (part_a.data.n() == 0 || part_b.data.n() == 0) {
    throw Error(ErrCode::bad_params, "a named part has no pairs");
  }
  return {std::move(part_a), std::move(part_b)};
}

std::vector<screen::Finding> parse_selection(const std::string& spec) {
  std::vector<screen::Finding> out;
  for (const std::string& item : split_list(spec)) {
    const auto colon = item.find(':');
    screen::Finding f;
    if (colon == std::string::npos) {
      f.outcome = item;
      f.direction = stats::Direction::greater;
    } else {
      f.outcome = item.substr(0, colon);
      f.direction = stats::direction_from_name(item.substr(colon + 1));
    }
    out.push_back(std::move(f));
  }
  return out;
}

struct CommonFlags {
  std::string data;
  std::string pairs;
  std::string out;
  std::string format = "json";
  std::string merge_fallback;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

std::set<std::string> fallback_set(const CommonFlags& flags) {
  const auto list = split_list(flags.merge_fallback);
  return {list.begin(), list.end()};
}

int run_impl(const std::vector<std::string>& args) {
  CLI::App app{"two-team cross-screening toolkit for matched observational studies"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // ---- validate ----------------------------------------------------------
  auto flags_validate = std::make_shared<CommonFlags>();
  CLI::App* cmd_validate = app.add_subcommand("validate", "ingest and validate a subject CSV");
  cmd_validate->add_option("--data", flags_validate->data, "subject CSV")->required();
  cmd_validate->add_option("--merge-fallback", flags_validate->merge_fallback,
                           "outcomes to fill from fallback columns (comma list)");
  cmd_validate->callback([flags_validate] {
    core::IngestOptions opts;
    opts.merge_fallback = fallback_set(*flags_validate);
    const core::Dataset ds = core::ingest(flags_validate->data, opts);
    int treated = 0;
    for (const auto& s : ds.subjects) treated += s.treated ? 1 : 0;
    std::cout << "subjects: " << ds.subjects.size() << "\n"
              << "treated: " << treated << "\n"
              << "covariates: " << ds.covariate_order.size() << "\n"
              << "outcomes: " << ds.outcome_order.size() << "\n"
              << "split levels: " << ds.split_levels().size() << "\n"
              << "digest: " << core::dataset_digest(ds) << "\n";
  });

  // ---- blind -------------------------------------------------------------
  auto flags_blind = std::make_shared<CommonFlags>();
  CLI::App* cmd_blind = app.add_subcommand("blind", "emit the outcome-free view");
  cmd_blind->add_option("--data", flags_blind->data, "subject CSV")->required();
  cmd_blind->add_option("--out", flags_blind->out, "output path (default stdout)");
  cmd_blind->callback([flags_blind] {
    const core::Dataset ds = core::ingest(flags_blind->data);
    write_output(flags_blind->out, core::emit(core::blind(ds)));
  });

  // ---- match -------------------------------------------------------------
  auto flags_match = std::make_shared<CommonFlags>();
  auto match_covariates = std::make_shared<std::string>();
  auto match_distance = std::make_shared<std::string>("mahalanobis");
  auto match_caliper = std::make_shared<double>(-1.0);
  auto match_window = std::make_shared<double>(-1.0);
  auto match_paired_out = std::make_shared<std::string>();
  CLI::App* cmd_match = app.add_subcommand("match", "risk-set matching");
  cmd_match->add_option("--data", flags_match->data, "subject CSV")->required();
  cmd_match->add_option("--covariates", *match_covariates, "comma list")->required();
  cmd_match->add_option("--distance", *match_distance, "mahalanobis|normalized-euclidean");
  cmd_match->add_option("--caliper", *match_caliper, "max distance");
  cmd_match->add_option("--time-window", *match_window,
                        "controls must stay untreated through index time + window");
  cmd_match->add_option("--out", flags_match->out, "pairs CSV output");
  cmd_match->add_option("--emit-paired", *match_paired_out,
                        "also write the paired-differences table");
  cmd_match->callback([=] {
    const core::Dataset ds = core::ingest(flags_match->data);
    match::MatchConfig config;
    config.covariates = split_list(*match_covariates);
    if (*match_distance == "mahalanobis") {
      config.distance = match::DistanceKind::mahalanobis;
    } else if (*match_distance == "normalized-euclidean") {
      config.distance = match::DistanceKind::normalized_euclidean;
    } else {
      throw Error(ErrCode::bad_usage, "unknown distance: " + *match_distance);
    }
    if (*match_caliper >= 0.0) config.caliper = *match_caliper;
    if (*match_window >= 0.0) config.time_window = *match_window;
    const match::MatchResult result = match::risk_set_match(ds, config);
    if (result.covariance_fallback) {
      std::cerr << "warning: singular covariance, fell back to "
                   "normalized-euclidean distance\n";
    }
    std::cerr << "matched pairs: " << result.pairs.size()
              << ", unmatched treated: " << result.unmatched_treated.size() << "\n";
    write_output(flags_match->out, match::pairs_to_csv(result.pairs));
    if (!match_paired_out->empty()) {
      paired::save_pair_table(match::build_pair_table(ds, result.pairs),
                              resolve_out_path(*match_paired_out));
    }
  });

  // ---- balance -----------------------------------------------------------
  auto flags_balance = std::make_shared<CommonFlags>();
  auto balance_covariates = std::make_shared<std::string>();
  CLI::App* cmd_balance = app.add_subcommand("balance", "standardized-difference table");
  cmd_balance->add_option("--data", flags_balance->data, "subject CSV")->required();
  cmd_balance->add_option("--pairs", flags_balance->pairs, "pairs CSV")->required();
  cmd_balance->add_option("--covariates", *balance_covariates, "comma list")->required();
  cmd_balance->add_option("--out", flags_balance->out, "balance CSV output");
  cmd_balance->callback([=] {
    const core::Dataset ds = core::ingest(flags_balance->data);
    const auto pairs = match::load_pairs(flags_balance->pairs);
    const match::BalanceTable table =
        match::balance(ds, pairs, split_list(*balance_covariates));
    write_output(flags_balance->out, match::balance_to_csv(table));
  });

  // ---- test --------------------------------------------------------------
  auto flags_test = std::make_shared<CommonFlags>();
  auto test_outcome = std::make_shared<std::string>();
  auto test_stat = std::make_shared<std::string>("W");
  auto test_m = std::make_shared<int>(8);
  auto test_mlo = std::make_shared<int>(6);
  auto test_mhi = std::make_shared<int>(7);
  auto test_group_by = std::make_shared<std::string>();
  auto test_direction = std::make_shared<std::string>("greater");
  auto test_gamma = std::make_shared<double>(1.0);
  auto test_exact = std::make_shared<bool>(false);
  auto test_draws = std::make_shared<long long>(1000000);
  CLI::App* cmd_test = app.add_subcommand("test", "one matched-pair sensitivity test");
  cmd_test->add_option("--data", flags_test->data, "paired CSV or subject CSV")->required();
  cmd_test->add_option("--pairs", flags_test->pairs, "pairs CSV (subject input)");
  cmd_test->add_option("--merge-fallback", flags_test->merge_fallback, "comma list");
  cmd_test->add_option("--outcome", *test_outcome, "outcome name")->required();
  cmd_test->add_option("--stat", *test_stat, "W|t|i|ustat|rank_sum");
  cmd_test->add_option("--m", *test_m, "ustat m");
  cmd_test->add_option("--m-lo", *test_mlo, "ustat m_lo");
  cmd_test->add_option("--m-hi", *test_mhi, "ustat m_hi");
  cmd_test->add_option("--group-by", *test_group_by, "modifier column for rank_sum");
  cmd_test->add_option("--direction", *test_direction, "greater|less");
  cmd_test->add_option("--gamma", *test_gamma, "sensitivity parameter");
  cmd_test->add_flag("--exact", *test_exact, "sign-flip null instead of the bound");
  auto test_seed_opt = cmd_test->add_option("--seed", flags_test->seed, "Monte Carlo seed");
  cmd_test->add_option("--draws", *test_draws, "Monte Carlo draws");
  cmd_test->add_option("--format", flags_test->format, "json|text");
  cmd_test->add_option("--out", flags_test->out, "output path (default stdout)");
  cmd_test->callback([=] {
    const paired::PairTable table = load_analysis_table(
        flags_test->data, flags_test->pairs, fallback_set(*flags_test));
    const stats::Statistic stat = statistic_from_flags(
        *test_stat, *test_m, *test_mlo, *test_mhi, *test_group_by);
    const stats::Direction dir = stats::direction_from_name(*test_direction);

    ordered_json doc;
    doc["outcome"] = *test_outcome;
    doc["statistic"] = stats::stat_kind_name(stat.kind);
    doc["direction"] = *test_direction;
    doc["gamma"] = *test_gamma;
    double p = 1.0;
    if (stat.kind == stats::StatKind::rank_sum) {
      const auto [a, b] = table.modifier_groups(*test_outcome, stat.group_by);
      if (*test_gamma == 1.0) {
        p = stats::rank_sum(a, b, dir);
      } else {
        if (test_seed_opt->count() == 0) {
          throw Error(ErrCode::bad_usage,
                      "--seed is required for the Monte Carlo rank-sum bound");
        }
        p = stats::rank_sum_worst_case(a, b, *test_gamma, dir, flags_test->seed,
                                       *test_draws);
        doc["approximate"] = true;
        print_seed(flags_test->seed);
      }
      doc["p_value"] = p;
    } else {
      stats::TestSpec spec{*test_outcome, stat, dir, *test_gamma};
      stats::TestOptions opts;
      opts.exact = *test_exact;
      opts.seed = flags_test->seed;
      opts.draws = *test_draws;
      const stats::PairedOutcome po = table.paired_outcome(*test_outcome);
      if (*test_exact && po.diffs.size() > 25 && test_seed_opt->count() == 0) {
        throw Error(ErrCode::bad_usage,
                    "--seed is required for Monte Carlo exact mode at N > 25");
      }
      const stats::SensitivityResult r = stats::run_test(po, spec, opts);
      doc["n_pairs"] = po.diffs.size();
      doc["n_dropped_missing"] = po.n_dropped_missing;
      doc["statistic_value"] = r.statistic;
      doc["expectation"] = r.expectation;
      doc["variance"] = r.variance;
      doc["deviate"] = r.deviate;
      doc["kappa"] = r.kappa;
      doc["p_value"] = r.p_upper;
      if (*test_exact) doc["exact"] = true;
      p = r.p_upper;
    }
    if (flags_test->format == "text") {
      write_output(flags_test->out,
                   *test_outcome + " p=" + format_double(p) + "\n");
    } else {
      write_output(flags_test->out, doc.dump(2) + "\n");
    }
  });

  // ---- plan-validate -----------------------------------------------------
  auto pv_plan = std::make_shared<std::string>();
  auto pv_budget = std::make_shared<double>(-1.0);
  CLI::App* cmd_pv = app.add_subcommand("plan-validate", "check a plan file");
  cmd_pv->add_option("--plan", *pv_plan, "plan JSON")->required();
  cmd_pv->add_option("--budget", *pv_budget, "required total budget");
  cmd_pv->callback([=] {
    const plan::Plan p = plan::parse_plan_file(*pv_plan);
    std::vector<std::string> violations = plan::validate_plan(p);
    if (*pv_budget > 0.0 && p.budget > *pv_budget + 1e-12) {
      violations.push_back("plan budget " + format_double(p.budget) +
                           " exceeds required budget " + format_double(*pv_budget));
    }
    if (violations.empty()) {
      std::cout << "valid (hash " << plan::plan_hash(p) << ")\n";
    } else {
      for (const std::string& v : violations) std::cout << "violation: " << v << "\n";
      throw Error(ErrCode::schema_violation, "plan is not valid");
    }
  });

  // ---- plan-run ----------------------------------------------------------
  auto flags_pr = std::make_shared<CommonFlags>();
  auto pr_plan = std::make_shared<std::string>();
  auto pr_part = std::make_shared<std::string>();
  auto pr_draws = std::make_shared<long long>(100000);
  CLI::App* cmd_pr = app.add_subcommand("plan-run", "execute one plan on paired data");
  cmd_pr->add_option("--plan", *pr_plan, "plan JSON")->required();
  cmd_pr->add_option("--data", flags_pr->data, "paired CSV or subject CSV")->required();
  cmd_pr->add_option("--pairs", flags_pr->pairs, "pairs CSV (subject input)");
  cmd_pr->add_option("--part", *pr_part, "restrict to one split level");
  auto pr_seed_opt = cmd_pr->add_option("--seed", flags_pr->seed, "Monte Carlo seed");
  cmd_pr->add_option("--draws", *pr_draws, "Monte Carlo draws");
  cmd_pr->add_option("--format", flags_pr->format, "json|text");
  cmd_pr->add_option("--out", flags_pr->out, "output path");
  cmd_pr->callback([=] {
    const plan::Plan p = plan::parse_plan_file(*pr_plan);
    paired::PairTable table = load_analysis_table(flags_pr->data, flags_pr->pairs,
                                                  fallback_set(*flags_pr));
    if (!pr_part->empty()) table = table.filter_split(*pr_part);
    plan::ExecOptions opts;
    opts.seed = flags_pr->seed;
    opts.mc_draws = *pr_draws;
    if (plan::needs_monte_carlo(p)) {
      if (pr_seed_opt->count() == 0) {
        throw Error(ErrCode::bad_usage,
                    "--seed is required: the plan contains Monte Carlo tests");
      }
      print_seed(flags_pr->seed);
    }
    const plan::PlanResult result = plan::execute_plan(p, table, opts);
    screen::FindingsReport report;  // single-execution wrapper for printing
    report.alpha_total = p.budget;
    screen::PlanExecution exec;
    exec.team = p.team;
    exec.target_part = pr_part->empty() ? "all" : *pr_part;
    exec.result = result;
    for (const auto& t : result.rejections()) {
      exec.rejections.push_back({t.spec.outcome_name, t.spec.direction});
    }
    std::sort(exec.rejections.begin(), exec.rejections.end());
    exec.rejections.erase(
        std::unique(exec.rejections.begin(), exec.rejections.end()),
        exec.rejections.end());
    report.executions.push_back(std::move(exec));
    report.provenance.plan_hashes[p.team] = plan::plan_hash(p);
    report.provenance.dataset_digest = paired::digest(table);
    report.provenance.seed = flags_pr->seed;
    report.provenance.toolkit_version = kVersion;
    if (flags_pr->format == "text") {
      write_output(flags_pr->out, screen::report_to_text(report));
    } else {
      write_output(flags_pr->out, screen::report_to_json(report).dump(2) + "\n");
    }
  });

  // ---- crossscreen -------------------------------------------------------
  CLI::App* cmd_cs = app.add_subcommand("crossscreen", "cross-screening runs");
  cmd_cs->require_subcommand(1);

  auto flags_tt = std::make_shared<CommonFlags>();
  auto tt_plan_a = std::make_shared<std::string>();
  auto tt_plan_b = std::make_shared<std::string>();
  auto tt_part_a = std::make_shared<std::string>();
  auto tt_part_b = std::make_shared<std::string>();
  auto tt_split = std::make_shared<std::string>("split");
  auto tt_alpha = std::make_shared<double>(0.05);
  auto tt_draws = std::make_shared<long long>(100000);
  CLI::App* cmd_tt = cmd_cs->add_subcommand("two-team", "confirmatory two-team run");
  cmd_tt->add_option("--data", flags_tt->data, "paired CSV or subject CSV")->required();
  cmd_tt->add_option("--pairs", flags_tt->pairs, "pairs CSV (subject input)");
  cmd_tt->add_option("--split", *tt_split, "split column name (the paired table's split column)");
  cmd_tt->add_option("--plan-a", *tt_plan_a, "team A plan (explored part A)")->required();
  cmd_tt->add_option("--plan-b", *tt_plan_b, "team B plan (explored part B)")->required();
  cmd_tt->add_option("--part-a", *tt_part_a, "part A level");
  cmd_tt->add_option("--part-b", *tt_part_b, "part B level");
  cmd_tt->add_option("--alpha", *tt_alpha, "total FWER budget");
  auto tt_seed_opt = cmd_tt->add_option("--seed", flags_tt->seed, "Monte Carlo seed");
  cmd_tt->add_option("--draws", *tt_draws, "Monte Carlo draws");
  cmd_tt->add_option("--format", flags_tt->format, "json|text");
  cmd_tt->add_option("--out", flags_tt->out, "output path");
  cmd_tt->callback([=] {
    const plan::Plan plan_a = plan::parse_plan_file(*tt_plan_a);
    const plan::Plan plan_b = plan::parse_plan_file(*tt_plan_b);
    const paired::PairTable table = load_analysis_table(
        flags_tt->data, flags_tt->pairs, {});
    const auto [part_a, part_b] = two_parts(table, *tt_part_a, *tt_part_b);
    plan::ExecOptions opts;
    opts.seed = flags_tt->seed;
    opts.mc_draws = *tt_draws;
    if (plan::needs_monte_carlo(plan_a) || plan::needs_monte_carlo(plan_b)) {
      if (tt_seed_opt->count() == 0) {
        throw Error(ErrCode::bad_usage,
                    "--seed is required: a plan contains Monte Carlo tests");
      }
      print_seed(flags_tt->seed);
    }
    const screen::FindingsReport report =
        screen::run_two_team(plan_a, plan_b, part_a, part_b, *tt_alpha, opts);
    if (flags_tt->format == "text") {
      write_output(flags_tt->out, screen::report_to_text(report));
    } else {
      write_output(flags_tt->out, screen::report_to_json(report).dump(2) + "\n");
    }
  });

  auto flags_auto = std::make_shared<CommonFlags>();
  auto auto_outcomes = std::make_shared<std::string>();
  auto auto_stat = std::make_shared<std::string>("W");
  auto auto_screen_threshold = std::make_shared<double>(0.025);
  auto auto_test_level = std::make_shared<double>(0.025);
  auto auto_gamma = std::make_shared<double>(1.0);
  auto auto_part_1 = std::make_shared<std::string>();
  auto auto_part_2 = std::make_shared<std::string>();
  CLI::App* cmd_auto = cmd_cs->add_subcommand("automated", "one-team automated cross-screening");
  cmd_auto->add_option("--data", flags_auto->data, "paired CSV or subject CSV")->required();
  cmd_auto->add_option("--pairs", flags_auto->pairs, "pairs CSV (subject input)");
  cmd_auto->add_option("--outcomes", *auto_outcomes, "comma list")->required();
  cmd_auto->add_option("--stat", *auto_stat, "W|t|i");
  cmd_auto->add_option("--screen-threshold", *auto_screen_threshold, "selection threshold");
  cmd_auto->add_option("--test-level", *auto_test_level, "Holm level per direction");
  cmd_auto->add_option("--gamma", *auto_gamma, "sensitivity parameter");
  cmd_auto->add_option("--part-1", *auto_part_1, "first part level");
  cmd_auto->add_option("--part-2", *auto_part_2, "second part level");
  cmd_auto->add_option("--format", flags_auto->format, "json|text");
  cmd_auto->add_option("--out", flags_auto->out, "output path");
  cmd_auto->callback([=] {
    const paired::PairTable table = load_analysis_table(
        flags_auto->data, flags_auto->pairs, {});
    const auto [part_1, part_2] = two_parts(table, *auto_part_1, *auto_part_2);
    screen::AutomatedConfig config;
    config.outcomes = split_list(*auto_outcomes);
    config.screen_statistic =
        statistic_from_flags(*auto_stat, 8, 6, 7, "");
    config.screen_threshold = *auto_screen_threshold;
    config.test_level = *auto_test_level;
    config.gamma = *auto_gamma;
    const screen::FindingsReport report = screen::run_automated(config, part_1, part_2);
    if (flags_auto->format == "text") {
      write_output(flags_auto->out, screen::report_to_text(report));
    } else {
      write_output(flags_auto->out, screen::report_to_json(report).dump(2) + "\n");
    }
  });

  auto flags_hf = std::make_shared<CommonFlags>();
  auto hf_outcomes = std::make_shared<std::string>();
  auto hf_alpha = std::make_shared<double>(0.05);
  auto hf_stat = std::make_shared<std::string>("W");
  auto hf_gamma = std::make_shared<double>(1.0);
  CLI::App* cmd_hf = cmd_cs->add_subcommand("holm-full", "Holm on the undivided data");
  cmd_hf->add_option("--data", flags_hf->data, "paired CSV or subject CSV")->required();
  cmd_hf->add_option("--pairs", flags_hf->pairs, "pairs CSV (subject input)");
  cmd_hf->add_option("--outcomes", *hf_outcomes, "comma list")->required();
  cmd_hf->add_option("--alpha", *hf_alpha, "FWER level");
  cmd_hf->add_option("--stat", *hf_stat, "W|t|i");
  cmd_hf->add_option("--gamma", *hf_gamma, "sensitivity parameter");
  cmd_hf->add_option("--format", flags_hf->format, "json|text");
  cmd_hf->add_option("--out", flags_hf->out, "output path");
  cmd_hf->callback([=] {
    const paired::PairTable table = load_analysis_table(
        flags_hf->data, flags_hf->pairs, {});
    const auto findings = screen::run_holm_full(
        split_list(*hf_outcomes), table, *hf_alpha,
        statistic_from_flags(*hf_stat, 8, 6, 7, ""), *hf_gamma);
    ordered_json doc;
    doc["alpha"] = *hf_alpha;
    doc["rejections"] = json::array();
    std::string text;
    for (const auto& f : findings) {
      ordered_json jf;
      jf["outcome"] = f.outcome;
      jf["direction"] = stats::direction_name(f.direction);
      doc["rejections"].push_back(jf);
      text += f.outcome + "[" + stats::direction_name(f.direction) + "]\n";
    }
    if (flags_hf->format == "text") {
      write_output(flags_hf->out, text.empty() ? "(no rejections)\n" : text);
    } else {
      write_output(flags_hf->out, doc.dump(2) + "\n");
    }
  });

  auto flags_multi = std::make_shared<CommonFlags>();
  auto multi_config = std::make_shared<std::string>();
  auto multi_draws = std::make_shared<long long>(100000);
  CLI::App* cmd_multi = cmd_cs->add_subcommand("multi", "multi-split cross-screening");
  cmd_multi->add_option("--config", *multi_config, "multi-split config JSON")->required();
  cmd_multi->add_option("--data", flags_multi->data, "paired CSV or subject CSV")->required();
  cmd_multi->add_option("--pairs", flags_multi->pairs, "pairs CSV (subject input)");
  auto multi_seed_opt = cmd_multi->add_option("--seed", flags_multi->seed, "Monte Carlo seed");
  cmd_multi->add_option("--draws", *multi_draws, "Monte Carlo draws");
  cmd_multi->add_option("--format", flags_multi->format, "json|text");
  cmd_multi->add_option("--out", flags_multi->out, "output path");
  cmd_multi->callback([=] {
    std::string base_dir;
    if (auto slash = multi_config->rfind('/'); slash != std::string::npos) {
      base_dir = multi_config->substr(0, slash);
    }
    const screen::MultiSplitConfig config = screen::parse_multi_split_config(
        jsonvalidate::load_json(*multi_config), base_dir);
    const paired::PairTable table = load_analysis_table(
        flags_multi->data, flags_multi->pairs, {});
    std::map<std::string, paired::PairTable> parts;
    for (const std::string& level : table.split_levels()) {
      parts.emplace(level, table.filter_split(level));
    }
    plan::ExecOptions opts;
    opts.seed = flags_multi->seed;
    opts.mc_draws = *multi_draws;
    bool needs_mc = false;
    for (const auto& a : config.assignments) {
      needs_mc = needs_mc || plan::needs_monte_carlo(a.plan);
    }
    if (needs_mc) {
      if (multi_seed_opt->count() == 0) {
        throw Error(ErrCode::bad_usage,
                    "--seed is required: a plan contains Monte Carlo tests");
      }
      print_seed(flags_multi->seed);
    }
    const screen::FindingsReport report = screen::run_multi_split(config, parts, opts);
    if (flags_multi->format == "text") {
      write_output(flags_multi->out, screen::report_to_text(report));
    } else {
      write_output(flags_multi->out, screen::report_to_json(report).dump(2) + "\n");
    }
  });

  // ---- ci ----------------------------------------------------------------
  CLI::App* cmd_ci = app.add_subcommand("ci", "selective confidence intervals");
  cmd_ci->require_subcommand(1);
  for (const std::string regime : {std::string("fcr"), std::string("simultaneous")}) {
    auto flags_ci = std::make_shared<CommonFlags>();
    auto ci_select_a = std::make_shared<std::string>();
    auto ci_select_b = std::make_shared<std::string>();
    auto ci_source_a = std::make_shared<std::string>();
    auto ci_source_b = std::make_shared<std::string>();
    auto ci_alpha = std::make_shared<double>(0.05);
    auto ci_stat = std::make_shared<std::string>("W");
    CLI::App* sub = cmd_ci->add_subcommand(
        regime, regime == "fcr" ? "FCR-controlled cross-team CIs"
                                : "simultaneous-coverage cross-team CIs");
    sub->add_option("--data", flags_ci->data, "paired CSV or subject CSV")->required();
    sub->add_option("--pairs", flags_ci->pairs, "pairs CSV (subject input)");
    sub->add_option("--select-a", *ci_select_a, "team A outcomes (outcome[:dir],...)");
    sub->add_option("--source-a", *ci_source_a, "part team A explored")->required();
    sub->add_option("--select-b", *ci_select_b, "team B outcomes");
    sub->add_option("--source-b", *ci_source_b, "part team B explored")->required();
    sub->add_option("--alpha", *ci_alpha, "total error budget");
    sub->add_option("--stat", *ci_stat, "W|t (inversion statistic)");
    sub->add_option("--format", flags_ci->format, "csv|text");
    sub->add_option("--out", flags_ci->out, "output path");
    const bool is_fcr = regime == "fcr";
    sub->callback([=] {
      const paired::PairTable table = load_analysis_table(
          flags_ci->data, flags_ci->pairs, {});
      const auto [part_src_a, part_src_b] = two_parts(table, *ci_source_a, *ci_source_b);
      ci::CISelection sel_a;
      sel_a.team = "A";
      sel_a.source_part = part_src_a.label;
      sel_a.entries = parse_selection(*ci_select_a);
      sel_a.regime = is_fcr ? ci::Regime::fcr : ci::Regime::simultaneous;
      ci::CISelection sel_b;
      sel_b.team = "B";
      sel_b.source_part = part_src_b.label;
      sel_b.entries = parse_selection(*ci_select_b);
      sel_b.regime = sel_a.regime;
      const stats::Statistic stat = statistic_from_flags(*ci_stat, 8, 6, 7, "");
      // A's CIs are built on B's part and vice versa.
      const std::vector<ci::CIRow> rows =
          is_fcr ? ci::fcr_two_team(sel_a, part_src_b, sel_b, part_src_a,
                                    *ci_alpha, stat)
                 : ci::simultaneous_cis(sel_a, part_src_b, sel_b, part_src_a,
                                        *ci_alpha, stat);
      write_output(flags_ci->out, ci::ci_table_to_csv(rows));
    });
  }

  // ---- simulate ----------------------------------------------------------
  auto flags_sim = std::make_shared<CommonFlags>();
  auto sim_scenario = std::make_shared<std::string>();
  auto sim_methods = std::make_shared<std::string>("two-team,automated,holm-full");
  auto sim_reps = std::make_shared<int>(0);
  auto sim_workers = std::make_shared<int>(1);
  CLI::App* cmd_sim = app.add_subcommand("simulate", "Monte Carlo design comparison");
  cmd_sim->add_option("--scenario", *sim_scenario, "scenario JSON")->required();
  cmd_sim->add_option("--methods", *sim_methods, "comma list");
  cmd_sim->add_option("--reps", *sim_reps, "override scenario replications");
  cmd_sim->add_option("--seed", flags_sim->seed, "RNG seed")->required();
  cmd_sim->add_option("--workers", *sim_workers, "worker threads");
  cmd_sim->add_option("--format", flags_sim->format, "csv|json");
  cmd_sim->add_option("--out", flags_sim->out, "output path");
  cmd_sim->callback([=] {
    sim::Scenario scenario = sim::load_scenario(*sim_scenario);
    scenario.seed = flags_sim->seed;
    if (*sim_reps > 0) scenario.replications = *sim_reps;
    std::vector<sim::MethodConfig> methods;
    for (const std::string& name : split_list(*sim_methods)) {
      sim::MethodConfig m;
      m.kind = sim::method_kind_from_name(name);
      methods.push_back(m);
    }
    print_seed(flags_sim->seed);
    std::cerr << "note: team proxies emulate the automated screening rule; "
                 "human exploratory analysis is not simulated\n";
    const sim::MetricsTable table =
        sim::run_comparison(scenario, methods, {}, *sim_workers);
    if (flags_sim->format == "json") {
      write_output(flags_sim->out, sim::metrics_to_json(table).dump(2) + "\n");
    } else {
      write_output(flags_sim->out, sim::metrics_to_csv(table));
    }
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return 0;
    }
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  try {
    return run_impl(args);
  } catch (const Error& e) {
    std::cerr << err_code_name(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrCode::bad_usage ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace xscreen::cli
