#ifndef XSCREEN_CI_HPP
#define XSCREEN_CI_HPP

#include <span>
#include <string>
#include <vector>

#include "xscreen/screen.hpp"
#include "xscreen/stats.hpp"

namespace xscreen::ci {

struct ShiftCI {
  std::string outcome;
  double estimate = 0.0;  // Hodges-Lehmann shift
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  stats::Statistic statistic;
  bool degenerate = false;  // all differences equal -> point interval
};

enum class Regime { fcr, simultaneous };

/// Outcomes a team selected (from the part it explored) for CI construction
/// on the other part.
struct CISelection {
  std::string team;
  std::string source_part;  // the part the selection was derived from
  std::vector<screen::Finding> entries;
  Regime regime = Regime::fcr;
};

/// A constructed CI with its owning team and regime, as written to the CI
/// table CSV.
struct CIRow {
  std::string team;
  Regime regime = Regime::fcr;
  ShiftCI ci;
};

/// Median of the N(N+1)/2 Walsh averages (Y_i + Y_j)/2, i <= j.
double hl_estimate(std::span<const double> diffs);

/// CI by inverting the two-sided shift test at gamma = 1: tau is covered iff
/// testing diffs - tau does not reject at level 1 - `level`. Bounds located
/// by bisection over [min - range, max + range] to 1e-8 * range.
ShiftCI invert_ci(std::span<const double> diffs, const stats::Statistic& statistic,
                  double level);

/// FCR regime: each selected outcome gets a 1 - alpha/2 CI on the part not
/// used for its selection. Valid because selection data and CI data are
/// independent.
std::vector<CIRow> fcr_two_team(const CISelection& selection_a,
                                const screen::Part& part_b,
                                const CISelection& selection_b,
                                const screen::Part& part_a, double alpha,
                                const stats::Statistic& statistic);

/// Simultaneous regime: Team A's n1 outcomes get 1 - (alpha/2)/n1 CIs on part
/// B, Team B's n2 get 1 - (alpha/2)/n2 on part A.
std::vector<CIRow> simultaneous_cis(const CISelection& selection_a,
                                    const screen::Part& part_b,
                                    const CISelection& selection_b,
                                    const screen::Part& part_a, double alpha,
                                    const stats::Statistic& statistic);

std::string ci_table_to_csv(const std::vector<CIRow>& rows);

}  // namespace xscreen::ci

#endif  // XSCREEN_CI_HPP
