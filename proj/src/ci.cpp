#include "xscreen/ci.hpp"

#include <algorithm>
#include <cmath>

#include "xscreen/csv.hpp"
#include "xscreen/mathutil.hpp"

namespace xscreen::ci {

double hl_estimate(std::span<const double> diffs) {
  if (diffs.empty()) {
    throw Error(ErrCode::empty_data, "hl_estimate requires at least one difference");
  }
  std::vector<double> walsh;
  walsh.reserve(diffs.size() * (diffs.size() + 1) / 2);
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    for (std::size_t j = i; j < diffs.size(); ++j) {
      walsh.push_back(0.5 * (diffs[i] + diffs[j]));
    }
  }
  return median(walsh);
}

namespace {

/// Standardized deviate of the shifted one-sided (greater) test at gamma 1.
/// Decreasing in tau. Shift values where every difference equals tau cannot
/// occur for non-degenerate data.
double shifted_deviate(std::span<const double> diffs,
                       const stats::Statistic& statistic, double tau) {
  std::vector<double> shifted(diffs.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) shifted[i] = diffs[i] - tau;
  const stats::ScoreVector sv = stats::make_scores(shifted, statistic);
  return stats::worst_case_p(sv, 1.0).deviate;
}

/// Largest tau in [lo, hi] with predicate(tau) false, assuming the predicate
/// is monotone false -> true; returns the crossing point.
template <typename Pred>
double bisect(double lo, double hi, double tol, const Pred& pred) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid)) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ShiftCI invert_ci(std::span<const double> diffs, const stats::Statistic& statistic,
                  double level) {
  if (diffs.size() < 2) {
    throw Error(ErrCode::bad_params, "invert_ci requires N >= 2");
  }
  if (statistic.kind != stats::StatKind::signed_rank &&
      statistic.kind != stats::StatKind::permutation_t) {
    throw Error(ErrCode::bad_params,
                "CI inversion supports signed_rank and permutation_t");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrCode::bad_params, "level must lie in (0,1)");
  }

  ShiftCI ci;
  ci.statistic = statistic;
  ci.level = level;

  const auto [min_it, max_it] = std::minmax_element(diffs.begin(), diffs.end());
  if (*min_it == *max_it) {
    ci.outcome = "";
    ci.degenerate = true;
    ci.estimate = ci.lower = ci.upper = *min_it;
    return ci;
  }
  const double range = *max_it - *min_it;
  const double lo = *min_it - range;
  const double hi = *max_it + range;
  const double tol = 1e-8 * range;
  const double z = norm_quantile(1.0 - (1.0 - level) / 2.0);

  // deviate(tau) decreases in tau: the lower bound is where it drops to +z,
  // the upper bound where it drops below -z.
  ci.lower = bisect(lo, hi, tol, [&](double tau) {
    return shifted_deviate(diffs, statistic, tau) <= z;
  });
  ci.upper = bisect(lo, hi, tol, [&](double tau) {
    return shifted_deviate(diffs, statistic, tau) < -z;
  });
  ci.estimate = hl_estimate(diffs);
  return ci;
}

namespace {

std::vector<CIRow> build_side(const CISelection& selection,
                              const screen::Part& target, double level,
                              Regime regime, const stats::Statistic& statistic) {
  if (selection.source_part == target.label) {
    throw Error(ErrCode::selection_leak,
                "selection of team '" + selection.team +
                    "' was derived from its own target part " + target.label);
  }
  std::vector<CIRow> rows;
  for (const screen::Finding& f : selection.entries) {
    const stats::PairedOutcome po = target.data.paired_outcome(f.outcome);
    CIRow row;
    row.team = selection.team;
    row.regime = regime;
    row.ci = invert_ci(po.diffs, statistic, level);
    row.ci.outcome = f.outcome;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<CIRow> fcr_two_team(const CISelection& selection_a,
                                const screen::Part& part_b,
                                const CISelection& selection_b,
                                const screen::Part& part_a, double alpha,
                                const stats::Statistic& statistic) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrCode::bad_params, "alpha must lie in (0,1)");
  }
  const double level = 1.0 - alpha / 2.0;
  std::vector<CIRow> rows =
      build_side(selection_a, part_b, level, Regime::fcr, statistic);
  std::vector<CIRow> side_b =
      build_side(selection_b, part_a, level, Regime::fcr, statistic);
  rows.insert(rows.end(), side_b.begin(), side_b.end());
  return rows;
}

std::vector<CIRow> simultaneous_cis(const CISelection& selection_a,
                                    const screen::Part& part_b,
                                    const CISelection& selection_b,
                                    const screen::Part& part_a, double alpha,
                                    const stats::Statistic& statistic) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrCode::bad_params, "alpha must lie in (0,1)");
  }
  std::vector<CIRow> rows;
  if (!selection_a.entries.empty()) {
    const double level = 1.0 - (alpha / 2.0) / double(selection_a.entries.size());
    rows = build_side(selection_a, part_b, level, Regime::simultaneous, statistic);
  }
  if (!selection_b.entries.empty()) {
    const double level = 1.0 - (alpha / 2.0) / double(selection_b.entries.size());
    std::vector<CIRow> side_b =
        build_side(selection_b, part_a, level, Regime::simultaneous, statistic);
    rows.insert(rows.end(), side_b.begin(), side_b.end());
  }
  return rows;
}

std::string ci_table_to_csv(const std::vector<CIRow>& rows) {
  csv::Table t;
  t.header = {"team", "outcome", "level", "estimate", "lower", "upper", "regime"};
  for (const CIRow& row : rows) {
    t.rows.push_back({row.team, row.ci.outcome, format_double(row.ci.level),
                      format_double(row.ci.estimate), format_double(row.ci.lower),
                      format_double(row.ci.upper),
                      row.regime == Regime::fcr ? "fcr" : "simultaneous"});
  }
  return csv::write_string(t);
}

}  // namespace xscreen::ci
