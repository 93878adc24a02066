#include "xscreen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xscreen/mathutil.hpp"
#include "xscreen/rng.hpp"

namespace xscreen::stats {

namespace {

void check_ustat_params(const UStatParams& p) {
  if (!(1 <= p.m_lo && p.m_lo <= p.m_hi && p.m_hi <= p.m)) {
    throw Error(ErrCode::bad_params,
                "ustat params require 1 <= m_lo <= m_hi <= m, got (" +
                    std::to_string(p.m) + "," + std::to_string(p.m_lo) + "," +
                    std::to_string(p.m_hi) + ")");
  }
}

// Scores for the nonzero oriented differences `kept`, by statistic kind.
// Rank-based kinds expect zeros to have been removed already.
std::vector<double> rank_based_scores(const std::vector<double>& abs_kept,
                                      const Statistic& stat) {
  const int n = int(abs_kept.size());
  std::vector<std::size_t> order(abs_kept.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return abs_kept[a] < abs_kept[b];
  });

  std::vector<double> base;  // score at sorted position r (1-based)
  if (stat.kind == StatKind::ustat) {
    base = ustat_scores(n, stat.ustat_params);
  } else {
    base.resize(std::size_t(n));
    for (int r = 0; r < n; ++r) base[std::size_t(r)] = double(r + 1);
  }

  // Average the positional scores over tie groups.
  std::vector<double> scores(abs_kept.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && abs_kept[order[j + 1]] == abs_kept[order[i]]) ++j;
    double avg = 0.0;
    for (std::size_t k = i; k <= j; ++k) avg += base[k];
    avg /= double(j - i + 1);
    for (std::size_t k = i; k <= j; ++k) scores[order[k]] = avg;
    i = j + 1;
  }
  return scores;
}

double ranksum_statistic(std::span<const double> group_a,
                         std::span<const double> group_b) {
  std::vector<double> pooled;
  pooled.reserve(group_a.size() + group_b.size());
  pooled.insert(pooled.end(), group_a.begin(), group_a.end());
  pooled.insert(pooled.end(), group_b.begin(), group_b.end());
  const std::vector<double> ranks = midranks(pooled);
  double w = 0.0;
  for (std::size_t i = 0; i < group_a.size(); ++i) w += ranks[i];
  return w;
}

double ranksum_normal_p(std::span<const double> group_a,
                        std::span<const double> group_b, double w_obs) {
  const double na = double(group_a.size());
  const double nb = double(group_b.size());
  const double n = na + nb;
  std::vector<double> pooled(group_a.begin(), group_a.end());
  pooled.insert(pooled.end(), group_b.begin(), group_b.end());
  std::sort(pooled.begin(), pooled.end());
  // tie correction sum t^3 - t over tie groups
  double tie_sum = 0.0;
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j + 1 < pooled.size() && pooled[j + 1] == pooled[i]) ++j;
    const double t = double(j - i + 1);
    tie_sum += t * t * t - t;
    i = j + 1;
  }
  const double mean = na * (n + 1.0) / 2.0;
  const double var = na * nb / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
  if (var <= 0.0) return 1.0;  // all pooled values equal
  const double z = (w_obs - mean - 0.5) / std::sqrt(var);
  return 1.0 - norm_cdf(z);
}

double ranksum_exact_p(std::span<const double> group_a,
                       std::span<const double> group_b, double w_obs) {
  const std::size_t na = group_a.size();
  std::vector<double> pooled(group_a.begin(), group_a.end());
  pooled.insert(pooled.end(), group_b.begin(), group_b.end());
  const std::vector<double> ranks = midranks(pooled);
  const std::size_t n = pooled.size();
  const double eps = 1e-9;

  // Walk all size-na index subsets of {0..n-1}.
  std::vector<std::size_t> idx(na);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  long long total = 0;
  long long at_least = 0;
  while (true) {
    double w = 0.0;
    for (std::size_t k : idx) w += ranks[k];
    ++total;
    if (w >= w_obs - eps) ++at_least;
    // next combination
    std::size_t pos = na;
    while (pos > 0 && idx[pos - 1] == n - na + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t k = pos; k < na; ++k) idx[k] = idx[k - 1] + 1;
  }
  return double(at_least) / double(total);
}

}  // namespace

std::vector<double> ustat_scores(int n, const UStatParams& params) {
  check_ustat_params(params);
  if (n < params.m) {
    throw Error(ErrCode::n_too_small, "ustat requires N >= m, got N = " +
                                          std::to_string(n) + ", m = " +
                                          std::to_string(params.m));
  }
  const double log_total = log_choose(n, params.m);
  std::vector<double> scores(std::size_t(n), 0.0);
  for (int r = 1; r <= n; ++r) {
    double q = 0.0;
    for (int l = params.m_lo; l <= params.m_hi; ++l) {
      const double lg = log_choose(r - 1, l - 1) + log_choose(n - r, params.m - l);
      if (std::isfinite(lg)) q += std::exp(lg - log_total);
    }
    scores[std::size_t(r - 1)] = q;
  }
  return scores;
}

ScoreVector make_scores(std::span<const double> diffs, const Statistic& stat) {
  if (diffs.empty()) {
    throw Error(ErrCode::empty_data, "make_scores: no paired differences");
  }
  ScoreVector sv;
  switch (stat.kind) {
    case StatKind::signed_rank:
    case StatKind::ustat: {
      std::vector<double> abs_kept;
      std::vector<std::uint8_t> sign_kept;
      for (double d : diffs) {
        if (d != 0.0) {
          abs_kept.push_back(std::fabs(d));
          sign_kept.push_back(d > 0.0 ? 1 : 0);
        }
      }
      if (abs_kept.empty()) {
        throw Error(ErrCode::all_zero_diffs,
                    "all paired differences are zero for a rank-based statistic");
      }
      sv.scores = rank_based_scores(abs_kept, stat);
      sv.positive = std::move(sign_kept);
      break;
    }
    case StatKind::permutation_t: {
      sv.scores.reserve(diffs.size());
      sv.positive.reserve(diffs.size());
      for (double d : diffs) {
        sv.scores.push_back(std::fabs(d));
        sv.positive.push_back(d > 0.0 ? 1 : 0);
      }
      break;
    }
    case StatKind::trimmed_halfmedian: {
      std::vector<double> abs_all(diffs.size());
      for (std::size_t i = 0; i < diffs.size(); ++i) abs_all[i] = std::fabs(diffs[i]);
      const double threshold = 0.5 * median(abs_all);
      sv.scores.reserve(diffs.size());
      sv.positive.reserve(diffs.size());
      for (std::size_t i = 0; i < diffs.size(); ++i) {
        sv.scores.push_back(abs_all[i] >= threshold ? abs_all[i] : 0.0);
        sv.positive.push_back(diffs[i] > 0.0 ? 1 : 0);
      }
      break;
    }
    case StatKind::rank_sum:
      throw Error(ErrCode::bad_params,
                  "rank_sum is a two-sample statistic; it has no sign-score form");
  }
  return sv;
}

SensitivityResult worst_case_p(const ScoreVector& sv, double gamma) {
  if (gamma < 1.0) {
    throw Error(ErrCode::bad_params, "gamma must be >= 1");
  }
  double sum_q = 0.0;
  double sum_q2 = 0.0;
  double t = 0.0;
  for (std::size_t i = 0; i < sv.size(); ++i) {
    sum_q += sv.scores[i];
    sum_q2 += sv.scores[i] * sv.scores[i];
    if (sv.positive[i]) t += sv.scores[i];
  }
  if (sum_q2 <= 0.0) {
    throw Error(ErrCode::zero_variance, "all scores are zero");
  }
  SensitivityResult r;
  r.gamma = gamma;
  r.kappa = gamma / (1.0 + gamma);
  r.statistic = t;
  r.expectation = r.kappa * sum_q;
  r.variance = r.kappa * (1.0 - r.kappa) * sum_q2;
  r.deviate = (t - r.expectation) / std::sqrt(r.variance);
  r.p_upper = 1.0 - norm_cdf(r.deviate);
  return r;
}

double exact_p(const ScoreVector& sv) {
  const std::size_t n = sv.size();
  if (n > 25) {
    throw Error(ErrCode::too_large_for_exact,
                "full sign-flip enumeration limited to N <= 25, got N = " +
                    std::to_string(n));
  }
  double t_obs = 0.0;
  std::vector<double> q;
  for (std::size_t i = 0; i < n; ++i) {
    if (sv.positive[i]) t_obs += sv.scores[i];
    if (sv.scores[i] != 0.0) q.push_back(sv.scores[i]);
  }
  double total_q = std::accumulate(q.begin(), q.end(), 0.0);
  const double eps = 1e-9 * (1.0 + total_q);

  // Meet in the middle over the nonzero scores; zero scores never move T*.
  const std::size_t h1 = q.size() / 2;
  const std::size_t h2 = q.size() - h1;
  std::vector<double> sums2(std::size_t(1) << h2, 0.0);
  for (std::size_t mask = 1; mask < sums2.size(); ++mask) {
    const std::size_t low = std::size_t(mask & (~mask + 1));
    std::size_t bit = 0;
    while ((std::size_t(1) << bit) != low) ++bit;
    sums2[mask] = sums2[mask ^ low] + q[h1 + bit];
  }
  std::sort(sums2.begin(), sums2.end());

  long long count = 0;
  const std::size_t m1 = std::size_t(1) << h1;
  for (std::size_t mask = 0; mask < m1; ++mask) {
    double s = 0.0;
    for (std::size_t b = 0; b < h1; ++b) {
      if (mask & (std::size_t(1) << b)) s += q[b];
    }
    const double need = t_obs - eps - s;
    count += long long(sums2.end() -
                       std::lower_bound(sums2.begin(), sums2.end(), need));
  }
  return double(count) / double(m1 * sums2.size());
}

double exact_p_mc(const ScoreVector& sv, std::uint64_t seed, long long draws) {
  if (draws < 1) throw Error(ErrCode::bad_draws, "draws must be positive");
  double t_obs = 0.0;
  double total_q = 0.0;
  for (std::size_t i = 0; i < sv.size(); ++i) {
    if (sv.positive[i]) t_obs += sv.scores[i];
    total_q += sv.scores[i];
  }
  const double eps = 1e-9 * (1.0 + total_q);
  Rng rng(seed);
  long long count = 0;
  for (long long d = 0; d < draws; ++d) {
    double t = 0.0;
    for (double qi : sv.scores) {
      if (rng.bernoulli(0.5)) t += qi;
    }
    if (t >= t_obs - eps) ++count;
  }
  return double(count) / double(draws);
}

double rank_sum(std::span<const double> group_a, std::span<const double> group_b,
                Direction direction) {
  if (group_a.empty() || group_b.empty()) {
    throw Error(ErrCode::empty_group, "rank_sum requires both groups nonempty");
  }
  if (direction == Direction::less) {
    std::vector<double> na(group_a.size()), nb(group_b.size());
    for (std::size_t i = 0; i < group_a.size(); ++i) na[i] = -group_a[i];
    for (std::size_t i = 0; i < group_b.size(); ++i) nb[i] = -group_b[i];
    return rank_sum(na, nb, Direction::greater);
  }
  const double w_obs = ranksum_statistic(group_a, group_b);
  if (group_a.size() + group_b.size() <= 12) {
    return ranksum_exact_p(group_a, group_b, w_obs);
  }
  return ranksum_normal_p(group_a, group_b, w_obs);
}

double rank_sum_worst_case(std::span<const double> group_a,
                           std::span<const double> group_b, double gamma,
                           Direction direction, std::uint64_t seed,
                           long long draws) {
  if (group_a.empty() || group_b.empty()) {
    throw Error(ErrCode::empty_group, "rank_sum requires both groups nonempty");
  }
  if (gamma < 1.0) throw Error(ErrCode::bad_params, "gamma must be >= 1");
  if (draws < 10000) {
    throw Error(ErrCode::bad_draws, "rank_sum_worst_case requires draws >= 10000");
  }
  if (direction == Direction::less) {
    std::vector<double> na(group_a.size()), nb(group_b.size());
    for (std::size_t i = 0; i < group_a.size(); ++i) na[i] = -group_a[i];
    for (std::size_t i = 0; i < group_b.size(); ++i) nb[i] = -group_b[i];
    return rank_sum_worst_case(na, nb, gamma, Direction::greater, seed, draws);
  }

  const double kappa = gamma / (1.0 + gamma);
  const double w_obs = ranksum_statistic(group_a, group_b);
  const double eps = 1e-9;
  Rng rng(seed);
  std::vector<double> resigned_a(group_a.size());
  std::vector<double> resigned_b(group_b.size());
  long long exceed = 0;
  for (long long d = 0; d < draws; ++d) {
    for (std::size_t i = 0; i < group_a.size(); ++i) {
      const double mag = std::fabs(group_a[i]);
      resigned_a[i] = rng.bernoulli(kappa) ? -mag : mag;  // A biased downward
    }
    for (std::size_t i = 0; i < group_b.size(); ++i) {
      const double mag = std::fabs(group_b[i]);
      resigned_b[i] = rng.bernoulli(kappa) ? mag : -mag;  // B biased upward
    }
    if (ranksum_statistic(resigned_a, resigned_b) >= w_obs - eps) ++exceed;
  }
  return wilson_upper(exceed, draws, 1.6448536269514722);
}

SensitivityResult run_test(const PairedOutcome& pairs, const TestSpec& spec,
                           const TestOptions& options) {
  if (spec.statistic.kind == StatKind::rank_sum) {
    throw Error(ErrCode::bad_params,
                "run_test handles matched-pair statistics only");
  }
  if (pairs.diffs.empty()) {
    throw Error(ErrCode::empty_data,
                "no paired differences for outcome " + pairs.outcome_name);
  }
  std::vector<double> oriented(pairs.diffs.begin(), pairs.diffs.end());
  if (spec.direction == Direction::less) {
    for (double& d : oriented) d = -d;
  }
  const ScoreVector sv = make_scores(oriented, spec.statistic);
  if (options.exact) {
    if (spec.gamma != 1.0) {
      throw Error(ErrCode::bad_params,
                  "the exact sign-flip null is defined at gamma = 1 only");
    }
    SensitivityResult r = worst_case_p(sv, 1.0);
    r.p_upper = sv.size() <= 25 ? exact_p(sv)
                                : exact_p_mc(sv, options.seed, options.draws);
    return r;
  }
  return worst_case_p(sv, spec.gamma);
}

const char* stat_kind_name(StatKind kind) {
  switch (kind) {
    case StatKind::signed_rank: return "signed_rank";
    case StatKind::permutation_t: return "permutation_t";
    case StatKind::trimmed_halfmedian: return "trimmed_halfmedian";
    case StatKind::ustat: return "ustat";
    case StatKind::rank_sum: return "rank_sum";
  }
  return "?";
}

StatKind stat_kind_from_name(const std::string& name) {
  if (name == "signed_rank" || name == "W") return StatKind::signed_rank;
  if (name == "permutation_t" || name == "t") return StatKind::permutation_t;
  if (name == "trimmed_halfmedian" || name == "i") return StatKind::trimmed_halfmedian;
  if (name == "ustat") return StatKind::ustat;
  if (name == "rank_sum") return StatKind::rank_sum;
  throw Error(ErrCode::schema_violation, "unknown statistic kind: " + name);
}

Direction direction_from_name(const std::string& name) {
  if (name == "greater") return Direction::greater;
  if (name == "less") return Direction::less;
  throw Error(ErrCode::schema_violation, "unknown direction: " + name);
}

}  // namespace xscreen::stats
