#ifndef XSCREEN_MATHUTIL_HPP
#define XSCREEN_MATHUTIL_HPP

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace xscreen {

/// Standard normal CDF.
double norm_cdf(double x);

/// Standard normal quantile (inverse CDF). p must lie in (0, 1).
double norm_quantile(double p);

/// log C(n, k); returns -inf for k < 0 or k > n.
double log_choose(long long n, long long k);

/// C(n, k) as a double (exact as long as the result stays below 2^53).
double choose(long long n, long long k);

/// Median with the usual midpoint convention for even length. Input is copied.
double median(std::span<const double> values);

/// Midranks (average ranks for ties), 1-based, over the given values.
std::vector<double> midranks(std::span<const double> values);

/// One-sided Wilson score upper confidence limit for a binomial proportion.
double wilson_upper(long long successes, long long trials, double z);

/// FNV-1a 64-bit content fingerprint (not cryptographic).
std::uint64_t fnv1a64(std::string_view bytes);

/// Fingerprint rendered as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

/// Locale-independent shortest-round-trip formatting of a double.
std::string format_double(double value);

}  // namespace xscreen

#endif  // XSCREEN_MATHUTIL_HPP
