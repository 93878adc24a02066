#ifndef XSCREEN_STATS_HPP
#define XSCREEN_STATS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xscreen/error.hpp"

namespace xscreen::stats {

/// Treated-minus-control differences for one outcome over the matched pairs,
/// after pairs with a missing value have been removed.
struct PairedOutcome {
  std::string outcome_name;
  std::vector<double> diffs;
  int n_dropped_missing = 0;
};

/// Parameters of the subset-rank U-statistic family: subsets of size m,
/// counting within-subset ranks between m_lo and m_hi.
struct UStatParams {
  int m = 8;
  int m_lo = 6;
  int m_hi = 7;
};

enum class StatKind {
  signed_rank,         // Wilcoxon signed-rank scores ("W")
  permutation_t,       // absolute differences as scores ("t")
  trimmed_halfmedian,  // drops |diff| below half the median |diff| ("i")
  ustat,               // subset-rank U-statistic family
  rank_sum,            // two-sample effect-modification test (not sign-score)
};

/// A test statistic choice. `ustat_params` applies only to StatKind::ustat;
/// `group_by` names the pair-level modifier column and applies only to
/// StatKind::rank_sum.
struct Statistic {
  StatKind kind = StatKind::signed_rank;
  UStatParams ustat_params;
  std::string group_by;
};

enum class Direction { greater, less };

inline const char* direction_name(Direction d) {
  return d == Direction::greater ? "greater" : "less";
}

/// One-sided matched-pair test under the sensitivity model.
struct TestSpec {
  std::string outcome_name;
  Statistic statistic;
  Direction direction = Direction::greater;
  double gamma = 1.0;
};

/// Nonnegative scores with per-pair alternative-direction indicators.
/// Zero-difference pairs are dropped for rank-based kinds and retained with a
/// zero score otherwise.
struct ScoreVector {
  std::vector<double> scores;
  std::vector<std::uint8_t> positive;  // 1 if the difference favors the alternative

  std::size_t size() const { return scores.size(); }
};

/// Worst-case normal-approximation bound for a sign-score statistic.
struct SensitivityResult {
  double gamma = 1.0;
  double kappa = 0.5;  // worst-case sign probability gamma/(1+gamma)
  double statistic = 0.0;
  double expectation = 0.0;
  double variance = 0.0;
  double deviate = 0.0;
  double p_upper = 1.0;
};

/// Scores of the subset-rank U-statistic by rank r in 1..n:
///   q_r = sum_{l=m_lo..m_hi} C(r-1, l-1) C(n-r, m-l) / C(n, m).
std::vector<double> ustat_scores(int n, const UStatParams& params);

/// Build the score vector for oriented differences (positive favors the
/// alternative). Ties in |diff| receive average ranks; tied ustat scores are
/// averaged over the tied positions.
ScoreVector make_scores(std::span<const double> diffs, const Statistic& stat);

/// Worst-case one-sided upper-bound p-value at sensitivity parameter gamma:
/// T = sum s_i q_i, kappa = gamma/(1+gamma), E = kappa sum q_i,
/// V = kappa(1-kappa) sum q_i^2, p = 1 - Phi((T - E)/sqrt(V)).
SensitivityResult worst_case_p(const ScoreVector& sv, double gamma);

/// Exact P(T* >= T) under independent fair sign flips, full enumeration over
/// 2^N assignments. Throws too_large_for_exact for N > 25.
double exact_p(const ScoreVector& sv);

/// Monte Carlo companion of exact_p for larger N.
double exact_p_mc(const ScoreVector& sv, std::uint64_t seed, long long draws);

/// One-sided Wilcoxon rank-sum p-value: exact enumeration when
/// |A|+|B| <= 12, otherwise normal approximation with tie and continuity
/// corrections. Direction `greater` means group A stochastically larger.
double rank_sum(std::span<const double> group_a, std::span<const double> group_b,
                Direction direction);

/// Monte Carlo sensitivity bound for the rank-sum test: signs are re-drawn
/// independently with the unfavorable sign taken with probability
/// kappa = gamma/(1+gamma) (group A biased downward, group B upward for
/// direction `greater`), magnitudes fixed. Returns the one-sided 95% upper
/// confidence limit of the empirical exceedance probability. This is a
/// declared approximation; reports flag it as such.
double rank_sum_worst_case(std::span<const double> group_a,
                           std::span<const double> group_b, double gamma,
                           Direction direction, std::uint64_t seed,
                           long long draws);

struct TestOptions {
  bool exact = false;          // use the sign-flip null instead of the bound (gamma must be 1)
  std::uint64_t seed = 0;      // for the Monte Carlo fallback of exact mode
  long long draws = 1000000;   // draws for the Monte Carlo fallback
};

/// Dispatch wrapper: orients the differences by direction, builds scores and
/// evaluates worst_case_p (or the exact sign-flip null when requested).
/// StatKind::rank_sum is not a matched-pair statistic and is rejected here.
SensitivityResult run_test(const PairedOutcome& pairs, const TestSpec& spec,
                           const TestOptions& options = {});

const char* stat_kind_name(StatKind kind);
StatKind stat_kind_from_name(const std::string& name);
Direction direction_from_name(const std::string& name);

}  // namespace xscreen::stats

#endif  // XSCREEN_STATS_HPP
