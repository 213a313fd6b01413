#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "flowplan/errors.hpp"

namespace flowplan {

// How an action's button form is satisfied by slot values.
enum class SlotRule { kAll, kAnyK, kOneOf, kNone };

const char* slot_rule_name(SlotRule rule);
SlotRule slot_rule_from_name(const std::string& name);

struct SlotRequirement {
  SlotRule kind = SlotRule::kNone;
  int k = 0;                            // only meaningful for kAnyK
  std::vector<std::string> slots;       // declared order
  std::vector<std::string> mandatory;   // always required on top of any combination

  // Admissible slot combinations, in declared order. Each combination already
  // includes the mandatory slots (appended last).
  std::vector<std::vector<std::string>> combinations() const;

  bool operator==(const SlotRequirement&) const = default;
};

struct WorkflowSpec {
  std::string name;
  std::vector<std::string> action_sequence;
  std::string prefix;  // prefix-group label, always a string prefix of `name`
  std::string group;   // workflow group the flow belongs to

  bool operator==(const WorkflowSpec&) const = default;
};

struct KbPerturbation {
  std::string new_slot;
  std::string guarded_action;   // existing action that now needs new_slot
  std::string provider_action;  // new action inserted before each occurrence
};

// Immutable after construction; safe to share across threads.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  // Validates every type invariant; throws Error on violation.
  static KnowledgeBase from_parts(std::map<std::string, WorkflowSpec> workflows,
                                  std::map<std::string, SlotRequirement> actions);

  const std::map<std::string, WorkflowSpec>& workflows() const { return workflows_; }
  const std::map<std::string, SlotRequirement>& actions() const { return actions_; }

  bool has_workflow(const std::string& name) const { return workflows_.count(name) != 0; }
  bool has_action(const std::string& name) const { return actions_.count(name) != 0; }
  const WorkflowSpec& workflow(const std::string& name) const;  // kUnknownFlow
  const SlotRequirement& action(const std::string& name) const;

  std::vector<std::string> workflow_names() const;
  std::vector<std::string> action_names() const;

  bool operator==(const KnowledgeBase&) const = default;

 private:
  std::map<std::string, WorkflowSpec> workflows_;
  std::map<std::string, SlotRequirement> actions_;
};

// Loads a KB document (UTF-8 JSON, top-level keys `workflows`, `prefix_groups`,
// `actions`, optional `groups`). Missing prefixes fall back to the first-underscore
// rule; missing groups default to the prefix label.
KnowledgeBase load_kb(const std::string& json_text);
std::string serialize_kb(const KnowledgeBase& kb);

// Prefix-group label for a flow. Unknown flows fall back to the substring up to
// and including the first underscore (the whole string when there is none).
std::string prefix_of(const KnowledgeBase& kb, const std::string& flow);

// Returns the perturbed KB and the names of every workflow whose sequence changed.
std::pair<KnowledgeBase, std::vector<std::string>> apply_perturbation(const KnowledgeBase& kb,
                                                                      const KbPerturbation& p);

}  // namespace flowplan
