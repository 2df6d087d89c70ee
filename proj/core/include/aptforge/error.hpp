#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aptforge {

enum class ErrorCode {
  NonStochasticRow,
  BadDiscount,
  BadInitialDist,
  BadShape,
  BadPolicy,
  EmptyActionSet,
  NoConvergence,
  SingularSystem,
  DegenerateDenominator,
  SolverDiverged,
  NotSpecial,
  NoAdmissibleAction,
  NoAdmissiblePolicy,
  BadSpec,
  SubsetArityError,
  InstanceTooLarge,
  NotAnExactCover,
  TooManyPolicies,
  Parse,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by malformed or unsupported input, as opposed to
/// numerical breakdown inside a solver.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by validate_mdp. Carries every violated invariant, not just the first.
class ValidationError : public Error {
 public:
  struct Issue {
    ErrorCode code;
    std::string detail;
  };

  explicit ValidationError(std::vector<Issue> issues);

  const std::vector<Issue>& issues() const noexcept { return issues_; }

 private:
  std::vector<Issue> issues_;
};

}  // namespace aptforge
