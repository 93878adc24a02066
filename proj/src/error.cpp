#include "xscreen/error.hpp"

namespace xscreen {

const char* err_code_name(ErrCode code) {
  switch (code) {
    case ErrCode::malformed_row: return "MalformedRow";
    case ErrCode::unknown_column: return "UnknownColumn";
    case ErrCode::duplicate_id: return "DuplicateId";
    case ErrCode::treated_without_time: return "TreatedWithoutTime";
    case ErrCode::missing_split_level: return "MissingSplitLevel";
    case ErrCode::bad_fractions: return "BadFractions";
    case ErrCode::no_covariates: return "NoCovariates";
    case ErrCode::empty_pairs: return "EmptyPairs";
    case ErrCode::n_too_small: return "NTooSmall";
    case ErrCode::bad_params: return "BadParams";
    case ErrCode::all_zero_diffs: return "AllZeroDiffs";
    case ErrCode::zero_variance: return "ZeroVariance";
    case ErrCode::too_large_for_exact: return "TooLargeForExact";
    case ErrCode::empty_group: return "EmptyGroup";
    case ErrCode::bad_draws: return "BadDraws";
    case ErrCode::empty_data: return "EmptyData";
    case ErrCode::schema_violation: return "SchemaViolation";
    case ErrCode::missing_outcome: return "MissingOutcome";
    case ErrCode::budget_exceeded: return "BudgetExceeded";
    case ErrCode::no_outcomes: return "NoOutcomes";
    case ErrCode::bad_p: return "BadP";
    case ErrCode::overlap_violation: return "OverlapViolation";
    case ErrCode::selection_leak: return "SelectionLeak";
    case ErrCode::bad_scenario: return "BadScenario";
    case ErrCode::bad_usage: return "BadUsage";
  }
  return "UnknownError";
}

}  // namespace xscreen
