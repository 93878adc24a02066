// Independent brute-force oracles used to pin expected values. These stay
// deliberately naive and share no code with the library implementations they
// check.
#ifndef XSCREEN_TESTS_ORACLES_HPP
#define XSCREEN_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracles {

/// Subset-rank U-statistic scores by enumerating every size-m subset of the
/// ranks 1..n and counting, per rank, the subsets in which its within-subset
/// position falls in [m_lo, m_hi].
inline std::vector<double> ustat_scores_enumeration(int n, int m, int m_lo, int m_hi) {
  std::vector<long long> counts(std::size_t(n), 0);
  long long total = 0;
  std::vector<int> subset(std::size_t(m));
  for (int i = 0; i < m; ++i) subset[std::size_t(i)] = i + 1;  // ranks, ascending
  while (true) {
    ++total;
    for (int pos = m_lo; pos <= m_hi; ++pos) {
      counts[std::size_t(subset[std::size_t(pos - 1)] - 1)] += 1;
    }
    int i = m - 1;
    while (i >= 0 && subset[std::size_t(i)] == n - (m - 1 - i)) --i;
    if (i < 0) break;
    ++subset[std::size_t(i)];
    for (int j = i + 1; j < m; ++j) subset[std::size_t(j)] = subset[std::size_t(j - 1)] + 1;
  }
  std::vector<double> scores(std::size_t(n));
  for (int r = 0; r < n; ++r) scores[std::size_t(r)] = double(counts[std::size_t(r)]) / double(total);
  return scores;
}

/// P(T* >= T_obs) under fair independent sign flips, by walking all 2^N
/// assignments directly.
inline double sign_flip_tail_enumeration(const std::vector<double>& scores,
                                         const std::vector<std::uint8_t>& positive) {
  const std::size_t n = scores.size();
  double t_obs = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (positive[i]) t_obs += scores[i];
    total += scores[i];
  }
  const double eps = 1e-9 * (1.0 + total);
  long long count = 0;
  const std::uint64_t masks = std::uint64_t(1) << n;
  for (std::uint64_t mask = 0; mask < masks; ++mask) {
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint64_t(1) << i)) t += scores[i];
    }
    if (t >= t_obs - eps) ++count;
  }
  return double(count) / double(masks);
}

/// Closed testing with Bonferroni local tests: H_i is rejected iff every
/// subset containing i has min p < alpha / |subset|.
inline std::vector<std::size_t> closed_testing_bonferroni(const std::vector<double>& p,
                                                          double alpha) {
  const std::size_t n = p.size();
  std::vector<std::size_t> rejected;
  for (std::size_t i = 0; i < n; ++i) {
    bool all_reject = true;
    const std::uint64_t masks = std::uint64_t(1) << n;
    for (std::uint64_t mask = 1; mask < masks && all_reject; ++mask) {
      if (!(mask & (std::uint64_t(1) << i))) continue;
      double min_p = 2.0;
      int size = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (mask & (std::uint64_t(1) << j)) {
          min_p = std::min(min_p, p[j]);
          ++size;
        }
      }
      if (!(min_p < alpha / double(size))) all_reject = false;
    }
    if (all_reject) rejected.push_back(i);
  }
  return rejected;
}

/// One-sided (group A greater) rank-sum p-value by enumerating every
/// assignment of the pooled values to the two group sizes.
inline double rank_sum_enumeration(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size();
  const std::size_t na = a.size();
  auto midrank = [&](double v) {
    double below = 0.0, equal = 0.0;
    for (double x : pooled) {
      if (x < v) below += 1.0;
      else if (x == v) equal += 1.0;
    }
    return below + (equal + 1.0) / 2.0;
  };
  double w_obs = 0.0;
  for (double v : a) w_obs += midrank(v);

  long long total = 0, at_least = 0;
  std::vector<std::size_t> pick(na);
  for (std::size_t i = 0; i < na; ++i) pick[i] = i;
  while (true) {
    double w = 0.0;
    for (std::size_t k : pick) w += midrank(pooled[k]);
    ++total;
    if (w >= w_obs - 1e-9) ++at_least;
    std::size_t pos = na;
    while (pos > 0 && pick[pos - 1] == n - na + pos - 1) --pos;
    if (pos == 0) break;
    ++pick[pos - 1];
    for (std::size_t k = pos; k < na; ++k) pick[k] = pick[k - 1] + 1;
  }
  return double(at_least) / double(total);
}

}  // namespace oracles

#endif  // XSCREEN_TESTS_ORACLES_HPP
