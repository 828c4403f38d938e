#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace panelcause {

enum class ErrorCode {
  // ingestion and validation
  kConfigError,
  kNoRows,
  kUnparseableCell,
  kDuplicateKey,
  kNonBinaryPolicy,
  kPolicyReversal,
  kEmptyIntersection,
  kInteriorMissing,
  kMissingCells,
  kMissingLag,
  // regression
  kShapeMismatch,
  kRankZero,
  kFewerClustersThanTwo,
  // design preconditions
  kNoTreated,
  kNoControl,
  kNoNeverTreated,
  kNoVariation,
  kStaggeredInput,
  kTooFewPeriods,
  kTooFewDonors,
  kUnbalancedInput,
  kCovariatesUnsupported,
  kUnidentifiedUnitFe,
  kAllExcluded,
  kNoConvergence,
  kUnknownUnit,
  kMethodNotViable,
  kNoTreatedUnits,
  kInvalidConfig,
};

/// Stable upper-snake-case name used in error records, e.g. "POLICY_REVERSAL".
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace panelcause
