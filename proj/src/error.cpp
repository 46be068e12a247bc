#include "tailcert/error.hpp"

namespace tailcert {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidCertificate: return "InvalidCertificate";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::SymbolicConstants: return "SymbolicConstants";
    case ErrorCode::NonPositiveAlpha: return "NonPositiveAlpha";
    case ErrorCode::BadModulus: return "BadModulus";
    case ErrorCode::DominationTooWeak: return "DominationTooWeak";
    case ErrorCode::MissingAssertion: return "MissingAssertion";
    case ErrorCode::CardinalityTooLarge: return "CardinalityTooLarge";
    case ErrorCode::MissingLipschitzAssertion: return "MissingLipschitzAssertion";
    case ErrorCode::MismatchedSizeOrRate: return "MismatchedSizeOrRate";
    case ErrorCode::RateTooSmall: return "RateTooSmall";
    case ErrorCode::RateBelowOne: return "RateBelowOne";
    case ErrorCode::RateBelowDimension: return "RateBelowDimension";
    case ErrorCode::BadAlpha: return "BadAlpha";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::MomentsUnavailable: return "MomentsUnavailable";
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::BadGrid: return "BadGrid";
    case ErrorCode::NoInDomainProbes: return "NoInDomainProbes";
    case ErrorCode::Unsatisfiable: return "Unsatisfiable";
    case ErrorCode::InsufficientExceedances: return "InsufficientExceedances";
    case ErrorCode::ScenarioUnknown: return "ScenarioUnknown";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::OracleBudgetExceeded: return "OracleBudgetExceeded";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace tailcert
