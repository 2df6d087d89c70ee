#include "aptforge/error.hpp"

namespace aptforge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonStochasticRow: return "NonStochasticRow";
    case ErrorCode::BadDiscount: return "BadDiscount";
    case ErrorCode::BadInitialDist: return "BadInitialDist";
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::BadPolicy: return "BadPolicy";
    case ErrorCode::EmptyActionSet: return "EmptyActionSet";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::NotSpecial: return "NotSpecial";
    case ErrorCode::NoAdmissibleAction: return "NoAdmissibleAction";
    case ErrorCode::NoAdmissiblePolicy: return "NoAdmissiblePolicy";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::SubsetArityError: return "SubsetArityError";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::NotAnExactCover: return "NotAnExactCover";
    case ErrorCode::TooManyPolicies: return "TooManyPolicies";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoConvergence:
    case ErrorCode::SingularSystem:
    case ErrorCode::DegenerateDenominator:
    case ErrorCode::SolverDiverged:
      return false;
    default:
      return true;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {

std::string join_issues(const std::vector<ValidationError::Issue>& issues) {
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += "; ";
    out += std::string(to_string(issue.code)) + "(" + issue.detail + ")";
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Issue> issues)
    : Error(issues.empty() ? ErrorCode::BadShape : issues.front().code,
            "invalid MDP: " + join_issues(issues)),
      issues_(std::move(issues)) {}

}  // namespace aptforge
