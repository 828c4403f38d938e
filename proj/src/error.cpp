#include "panelcause/error.hpp"

namespace panelcause {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigError: return "CONFIG_ERROR";
    case ErrorCode::kNoRows: return "NO_ROWS";
    case ErrorCode::kUnparseableCell: return "UNPARSEABLE_CELL";
    case ErrorCode::kDuplicateKey: return "DUPLICATE_KEY";
    case ErrorCode::kNonBinaryPolicy: return "NON_BINARY_POLICY";
    case ErrorCode::kPolicyReversal: return "POLICY_REVERSAL";
    case ErrorCode::kEmptyIntersection: return "EMPTY_INTERSECTION";
    case ErrorCode::kInteriorMissing: return "INTERIOR_MISSING";
    case ErrorCode::kMissingCells: return "MISSING_CELLS";
    case ErrorCode::kMissingLag: return "MISSING_LAG";
    case ErrorCode::kShapeMismatch: return "SHAPE_MISMATCH";
    case ErrorCode::kRankZero: return "RANK_ZERO";
    case ErrorCode::kFewerClustersThanTwo: return "FEWER_CLUSTERS_THAN_TWO";
    case ErrorCode::kNoTreated: return "NO_TREATED";
    case ErrorCode::kNoControl: return "NO_CONTROL";
    case ErrorCode::kNoNeverTreated: return "NO_NEVER_TREATED";
    case ErrorCode::kNoVariation: return "NO_VARIATION";
    case ErrorCode::kStaggeredInput: return "STAGGERED_INPUT";
    case ErrorCode::kTooFewPeriods: return "TOO_FEW_PERIODS";
    case ErrorCode::kTooFewDonors: return "TOO_FEW_DONORS";
    case ErrorCode::kUnbalancedInput: return "UNBALANCED_INPUT";
    case ErrorCode::kCovariatesUnsupported: return "COVARIATES_UNSUPPORTED";
    case ErrorCode::kUnidentifiedUnitFe: return "UNIDENTIFIED_UNIT_FE";
    case ErrorCode::kAllExcluded: return "ALL_EXCLUDED";
    case ErrorCode::kNoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::kUnknownUnit: return "UNKNOWN_UNIT";
    case ErrorCode::kMethodNotViable: return "METHOD_NOT_VIABLE";
    case ErrorCode::kNoTreatedUnits: return "NO_TREATED_UNITS";
    case ErrorCode::kInvalidConfig: return "INVALID_CONFIG";
  }
  return "UNKNOWN";
}

}  // namespace panelcause
