// Shared synthetic-data builders for the matching tests and the acceptance
// suite.
#ifndef XSCREEN_TESTS_FIXTURES_HPP
#define XSCREEN_TESTS_FIXTURES_HPP

#include <string>

#include "xscreen/core.hpp"
#include "xscreen/mathutil.hpp"
#include "xscreen/rng.hpp"

namespace fixtures {

/// A randomized risk-set cohort: treated subjects at random times, covariates
/// with an optional treated-vs-control bias so matching has signal to remove.
inline xscreen::core::Dataset random_cohort(xscreen::Rng& rng, int n_subjects,
                                            double covariate_bias) {
  using xscreen::core::Dataset;
  using xscreen::core::Subject;
  Dataset ds;
  ds.covariate_order = {"x1", "x2"};
  ds.covariate_times["x1"] = std::nullopt;  // baseline
  ds.covariate_times["x2"] = std::nullopt;
  ds.outcome_order = {"y"};
  for (int i = 0; i < n_subjects; ++i) {
    Subject s;
    s.id = "s" + std::to_string(i + 1);
    s.split_level = "a";
    s.treated = rng.bernoulli(0.35);
    if (s.treated) s.treatment_time = 18.0 + double(rng.below(15));
    const double bias = s.treated ? covariate_bias : 0.0;
    s.covariates["x1"] = bias + rng.normal();
    s.covariates["x2"] = bias * 0.5 + rng.normal();
    s.outcomes["y"] = rng.normal();
    ds.subjects.push_back(std::move(s));
  }
  return ds;
}

}  // namespace fixtures

#endif  // XSCREEN_TESTS_FIXTURES_HPP
