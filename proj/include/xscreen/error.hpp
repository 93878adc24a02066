#ifndef XSCREEN_ERROR_HPP
#define XSCREEN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace xscreen {

/// Error identities surfaced by the toolkit. Tests and the CLI dispatch on
/// the code, not on message text.
enum class ErrCode {
  // data ingestion
  malformed_row,
  unknown_column,
  duplicate_id,
  treated_without_time,
  missing_split_level,
  bad_fractions,
  // matching
  no_covariates,
  empty_pairs,
  // statistics
  n_too_small,
  bad_params,
  all_zero_diffs,
  zero_variance,
  too_large_for_exact,
  empty_group,
  bad_draws,
  empty_data,
  // plans and orchestration
  schema_violation,
  missing_outcome,
  budget_exceeded,
  no_outcomes,
  bad_p,
  overlap_violation,
  selection_leak,
  bad_scenario,
  bad_usage,
};

class Error : public std::runtime_error {
 public:
  Error(ErrCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrCode code() const { return code_; }

 private:
  ErrCode code_;
};

const char* err_code_name(ErrCode code);

}  // namespace xscreen

#endif  // XSCREEN_ERROR_HPP
