#ifndef XSCREEN_RNG_HPP
#define XSCREEN_RNG_HPP

#include <cstdint>
#include <random>

namespace xscreen {

/// Deterministic RNG used everywhere Monte Carlo output must be bitwise
/// reproducible. mt19937_64 is fully pinned by the standard; the variate
/// transforms below are hand-rolled because the std distributions are
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1].
  double uniform_pos() { return double((gen_() >> 11) + 1) * 0x1.0p-53; }

  /// Uniform integer in [0, bound), bound >= 1. Unbiased via rejection.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller; the paired variate is cached.
  double normal();

  /// Bernoulli(p).
  bool bernoulli(double p) { return uniform() < p; }

  /// Chi-square with integer df as a sum of squared normals.
  double chi_square(int df);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[std::size_t(below(i))]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

/// SplitMix64 mixing step, used to derive substream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for an independent substream identified by up to three indices.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t a,
                             std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace xscreen

#endif  // XSCREEN_RNG_HPP
