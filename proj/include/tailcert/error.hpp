#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tailcert {

enum class ErrorCode {
  InvalidArgument,
  InvalidCertificate,
  OutOfDomain,
  SymbolicConstants,
  NonPositiveAlpha,
  BadModulus,
  DominationTooWeak,
  MissingAssertion,
  CardinalityTooLarge,
  MissingLipschitzAssertion,
  MismatchedSizeOrRate,
  RateTooSmall,
  RateBelowOne,
  RateBelowDimension,
  BadAlpha,
  BadSpec,
  MomentsUnavailable,
  ZeroNorm,
  EpsilonOutOfRange,
  BudgetExceeded,
  BadGrid,
  NoInDomainProbes,
  Unsatisfiable,
  InsufficientExceedances,
  ScenarioUnknown,
  DimensionTooLarge,
  OracleBudgetExceeded,
  IoFailure,
  ParseError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tailcert
