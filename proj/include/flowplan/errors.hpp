#pragma once

#include <stdexcept>
#include <string>

namespace flowplan {

enum class Errc {
  kMalformedDocument,
  kUnknownActionReference,
  kDuplicateWorkflow,
  kInvalidPerturbation,
  kUnknownFlow,
  kUnknownProposition,
  kNotApplicable,
  kSearchBudgetExceeded,
  kUnsolvable,
  kInfeasibleSplit,
  kMissingPlan,
  kMissingFlow,
  kCustomerTurn,
  kMissingPlanInContext,
  kAgentUnavailable,
  kTimeout,
  kInvalidArgument,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void throw_error(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace flowplan
