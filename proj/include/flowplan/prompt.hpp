#pragma once

#include <string>
#include <vector>

#include "flowplan/dialogue.hpp"
#include "flowplan/planner.hpp"

namespace flowplan {

// Which augmentations the context carries: legal flow list (L), flow name (F),
// action plan (P). A plan is always preceded by its flow label.
struct PromptConfig {
  bool include_legal_flows = false;
  bool include_flow = false;
  bool include_plan = false;
  bool include_plan_slots = false;  // render gathered slots interleaved with actions

  // Accepts combinations of the letters L, F, P plus "P(s)" for the
  // slot-augmented plan; "" or "none" for the bare context.
  static PromptConfig from_string(const std::string& spec);
  std::string to_string() const;

  void validate() const;  // include_plan implies include_flow
  bool operator==(const PromptConfig&) const = default;
};

struct AugmentedContext {
  std::string text;
  std::size_t turn_index = 0;
  PromptConfig config;
};

// [legal_flows: f1, f2;] history [flow: <flow>;] [action_plan: a1, a2;]
// joined by single spaces; an empty plan renders as `action_plan: ;`.
AugmentedContext build_context(const Dialogue& d, std::size_t upto, const PromptConfig& cfg,
                               const std::vector<std::string>& legal_flows, const std::string& flow,
                               const ActionPlan* plan);

// `flow: <flow>; agent: <utterance>` or `flow: <flow>; action: <name>: <values>`.
// Customer turns are never prediction targets.
std::string build_target(const Turn& t, const std::string& flow);

}  // namespace flowplan
