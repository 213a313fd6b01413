#include "flowplan/errors.hpp"

namespace flowplan {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::kMalformedDocument: return "MALFORMED_DOCUMENT";
    case Errc::kUnknownActionReference: return "UNKNOWN_ACTION_REFERENCE";
    case Errc::kDuplicateWorkflow: return "DUPLICATE_WORKFLOW";
    case Errc::kInvalidPerturbation: return "INVALID_PERTURBATION";
    case Errc::kUnknownFlow: return "UNKNOWN_FLOW";
    case Errc::kUnknownProposition: return "UNKNOWN_PROPOSITION";
    case Errc::kNotApplicable: return "NOT_APPLICABLE";
    case Errc::kSearchBudgetExceeded: return "SEARCH_BUDGET_EXCEEDED";
    case Errc::kUnsolvable: return "UNSOLVABLE";
    case Errc::kInfeasibleSplit: return "INFEASIBLE_SPLIT";
    case Errc::kMissingPlan: return "MISSING_PLAN";
    case Errc::kMissingFlow: return "MISSING_FLOW";
    case Errc::kCustomerTurn: return "CUSTOMER_TURN";
    case Errc::kMissingPlanInContext: return "MISSING_PLAN_IN_CONTEXT";
    case Errc::kAgentUnavailable: return "AGENT_UNAVAILABLE";
    case Errc::kTimeout: return "TIMEOUT";
    case Errc::kInvalidArgument: return "INVALID_ARGUMENT";
  }
  return "UNKNOWN_ERROR";
}

}  // namespace flowplan
