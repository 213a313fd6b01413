#include "flowplan/kb.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace flowplan {

using nlohmann::json;
using nlohmann::ordered_json;

const char* slot_rule_name(SlotRule rule) {
  switch (rule) {
    case SlotRule::kAll: return "all";
    case SlotRule::kAnyK: return "any_k";
    case SlotRule::kOneOf: return "one_of";
    case SlotRule::kNone: return "none";
  }
  return "none";
}

SlotRule slot_rule_from_name(const std::string& name) {
  if (name == "all") return SlotRule::kAll;
  if (name == "any_k") return SlotRule::kAnyK;
  if (name == "one_of") return SlotRule::kOneOf;
  if (name == "none") return SlotRule::kNone;
  throw_error(Errc::kMalformedDocument, "unknown slot rule '" + name + "'");
}

namespace {

bool valid_token(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-')) return false;
  }
  return true;
}

std::string first_underscore_prefix(const std::string& flow) {
  auto pos = flow.find('_');
  if (pos == std::string::npos) return flow;
  return flow.substr(0, pos + 1);
}

void validate_requirement(const std::string& action, const SlotRequirement& req) {
  for (const auto& s : req.slots) {
    if (!valid_token(s))
      throw_error(Errc::kMalformedDocument, "action '" + action + "' has invalid slot name '" + s + "'");
  }
  for (const auto& s : req.mandatory) {
    if (!valid_token(s))
      throw_error(Errc::kMalformedDocument, "action '" + action + "' has invalid mandatory slot '" + s + "'");
  }
  switch (req.kind) {
    case SlotRule::kAnyK:
      if (req.k < 1 || req.k > static_cast<int>(req.slots.size()))
        throw_error(Errc::kMalformedDocument,
                    "action '" + action + "' needs 1 <= k <= |slots| for any_k");
      break;
    case SlotRule::kAll:
    case SlotRule::kOneOf:
      if (req.slots.empty())
        throw_error(Errc::kMalformedDocument, "action '" + action + "' needs at least one slot");
      break;
    case SlotRule::kNone:
      if (!req.slots.empty())
        throw_error(Errc::kMalformedDocument, "action '" + action + "' with rule none must have no slots");
      break;
  }
}

// Detects duplicate keys inside the top-level "workflows" object, which nlohmann
// would otherwise silently collapse.
void scan_duplicate_workflows(const std::string& text) {
  std::string current_top;
  std::set<std::string> seen;
  json::parser_callback_t cb = [&](int depth, json::parse_event_t event, json& parsed) {
    if (event == json::parse_event_t::key) {
      if (depth == 1) {
        current_top = parsed.get<std::string>();
      } else if (depth == 2 && current_top == "workflows") {
        const auto name = parsed.get<std::string>();
        if (!seen.insert(name).second)
          throw_error(Errc::kDuplicateWorkflow, "workflow '" + name + "' declared twice");
      }
    }
    return true;
  };
  static_cast<void>(json::parse(text, cb));
}

}  // namespace

std::vector<std::vector<std::string>> SlotRequirement::combinations() const {
  std::vector<std::vector<std::string>> combos;
  switch (kind) {
    case SlotRule::kAll:
      combos.push_back(slots);
      break;
    case SlotRule::kOneOf:
      for (const auto& s : slots) combos.push_back({s});
      break;
    case SlotRule::kNone:
      combos.push_back({});
      break;
    case SlotRule::kAnyK: {
      // k-subsets in declared order (lexicographic over slot positions).
      const int n = static_cast<int>(slots.size());
      std::vector<int> idx(static_cast<size_t>(k));
      for (int i = 0; i < k; ++i) idx[static_cast<size_t>(i)] = i;
      while (true) {
        std::vector<std::string> combo;
        combo.reserve(static_cast<size_t>(k));
        for (int i : idx) combo.push_back(slots[static_cast<size_t>(i)]);
        combos.push_back(std::move(combo));
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<size_t>(pos)] == n - k + pos) --pos;
        if (pos < 0) break;
        ++idx[static_cast<size_t>(pos)];
        for (int i = pos + 1; i < k; ++i)
          idx[static_cast<size_t>(i)] = idx[static_cast<size_t>(i - 1)] + 1;
      }
      break;
    }
  }
  for (auto& combo : combos)
    combo.insert(combo.end(), mandatory.begin(), mandatory.end());
  return combos;
}

KnowledgeBase KnowledgeBase::from_parts(std::map<std::string, WorkflowSpec> workflows,
                                        std::map<std::string, SlotRequirement> actions) {
  if (workflows.empty())
    throw_error(Errc::kMalformedDocument, "workflow table is empty");
  for (const auto& [name, req] : actions) {
    if (!valid_token(name))
      throw_error(Errc::kMalformedDocument, "invalid action name '" + name + "'");
    validate_requirement(name, req);
  }
  for (auto& [name, spec] : workflows) {
    if (!valid_token(name))
      throw_error(Errc::kMalformedDocument, "invalid workflow name '" + name + "'");
    if (spec.name != name)
      throw_error(Errc::kMalformedDocument, "workflow '" + name + "' has mismatched name field");
    if (spec.action_sequence.empty())
      throw_error(Errc::kMalformedDocument, "workflow '" + name + "' has an empty action sequence");
    for (size_t i = 0; i < spec.action_sequence.size(); ++i) {
      const auto& action = spec.action_sequence[i];
      if (actions.count(action) == 0)
        throw_error(Errc::kUnknownActionReference,
                    "workflow '" + name + "' references undeclared action '" + action + "'");
      if (i > 0 && spec.action_sequence[i - 1] == action)
        throw_error(Errc::kMalformedDocument,
                    "workflow '" + name + "' repeats action '" + action + "' back to back");
    }
    if (spec.prefix.empty()) spec.prefix = first_underscore_prefix(name);
    if (name.rfind(spec.prefix, 0) != 0)
      throw_error(Errc::kMalformedDocument,
                  "prefix '" + spec.prefix + "' is not a prefix of workflow '" + name + "'");
    if (spec.group.empty()) spec.group = spec.prefix;
  }
  KnowledgeBase kb;
  kb.workflows_ = std::move(workflows);
  kb.actions_ = std::move(actions);
  return kb;
}

const WorkflowSpec& KnowledgeBase::workflow(const std::string& name) const {
  auto it = workflows_.find(name);
  if (it == workflows_.end()) throw_error(Errc::kUnknownFlow, "no workflow named '" + name + "'");
  return it->second;
}

const SlotRequirement& KnowledgeBase::action(const std::string& name) const {
  auto it = actions_.find(name);
  if (it == actions_.end())
    throw_error(Errc::kUnknownActionReference, "no action named '" + name + "'");
  return it->second;
}

std::vector<std::string> KnowledgeBase::workflow_names() const {
  std::vector<std::string> names;
  names.reserve(workflows_.size());
  for (const auto& [name, spec] : workflows_) names.push_back(name);
  return names;
}

std::vector<std::string> KnowledgeBase::action_names() const {
  std::vector<std::string> names;
  names.reserve(actions_.size());
  for (const auto& [name, req] : actions_) names.push_back(name);
  return names;
}

KnowledgeBase load_kb(const std::string& json_text) {
  json doc;
  try {
    scan_duplicate_workflows(json_text);
    doc = json::parse(json_text);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw_error(Errc::kMalformedDocument, e.what());
  }
  if (!doc.is_object() || !doc.contains("workflows") || !doc.contains("actions"))
    throw_error(Errc::kMalformedDocument, "expected top-level 'workflows' and 'actions' tables");

  try {
    std::map<std::string, SlotRequirement> actions;
    for (const auto& [name, body] : doc.at("actions").items()) {
      SlotRequirement req;
      req.kind = slot_rule_from_name(body.at("kind").get<std::string>());
      if (body.contains("k")) req.k = body.at("k").get<int>();
      if (body.contains("slots")) req.slots = body.at("slots").get<std::vector<std::string>>();
      if (body.contains("mandatory"))
        req.mandatory = body.at("mandatory").get<std::vector<std::string>>();
      actions[name] = std::move(req);
    }

    const json prefixes = doc.value("prefix_groups", json::object());
    const json groups = doc.value("groups", json::object());
    std::map<std::string, WorkflowSpec> workflows;
    for (const auto& [name, seq] : doc.at("workflows").items()) {
      WorkflowSpec spec;
      spec.name = name;
      spec.action_sequence = seq.get<std::vector<std::string>>();
      if (prefixes.contains(name)) spec.prefix = prefixes.at(name).get<std::string>();
      if (groups.contains(name)) spec.group = groups.at(name).get<std::string>();
      workflows[name] = std::move(spec);
    }
    return KnowledgeBase::from_parts(std::move(workflows), std::move(actions));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw_error(Errc::kMalformedDocument, e.what());
  }
}

std::string serialize_kb(const KnowledgeBase& kb) {
  ordered_json doc;
  ordered_json workflows = ordered_json::object();
  ordered_json prefixes = ordered_json::object();
  ordered_json groups = ordered_json::object();
  for (const auto& [name, spec] : kb.workflows()) {
    workflows[name] = spec.action_sequence;
    prefixes[name] = spec.prefix;
    groups[name] = spec.group;
  }
  ordered_json actions = ordered_json::object();
  for (const auto& [name, req] : kb.actions()) {
    ordered_json body;
    body["kind"] = slot_rule_name(req.kind);
    if (req.kind == SlotRule::kAnyK) body["k"] = req.k;
    body["slots"] = req.slots;
    if (!req.mandatory.empty()) body["mandatory"] = req.mandatory;
    actions[name] = std::move(body);
  }
  doc["workflows"] = std::move(workflows);
  doc["prefix_groups"] = std::move(prefixes);
  doc["groups"] = std::move(groups);
  doc["actions"] = std::move(actions);
  return doc.dump(2) + "\n";
}

std::string prefix_of(const KnowledgeBase& kb, const std::string& flow) {
  auto it = kb.workflows().find(flow);
  if (it != kb.workflows().end()) return it->second.prefix;
  return first_underscore_prefix(flow);
}

std::pair<KnowledgeBase, std::vector<std::string>> apply_perturbation(const KnowledgeBase& kb,
                                                                      const KbPerturbation& p) {
  if (!valid_token(p.new_slot) || !valid_token(p.provider_action))
    throw_error(Errc::kInvalidPerturbation, "slot and action names must be lowercase tokens");
  if (kb.has_action(p.provider_action))
    throw_error(Errc::kInvalidPerturbation,
                "provider action '" + p.provider_action + "' already exists");
  if (!kb.has_action(p.guarded_action))
    throw_error(Errc::kInvalidPerturbation,
                "guarded action '" + p.guarded_action + "' is not in the KB");

  auto actions = kb.actions();
  auto& guarded = actions[p.guarded_action];
  const auto& slots = guarded.slots;
  if (std::find(slots.begin(), slots.end(), p.new_slot) != slots.end() ||
      std::find(guarded.mandatory.begin(), guarded.mandatory.end(), p.new_slot) !=
          guarded.mandatory.end())
    throw_error(Errc::kInvalidPerturbation,
                "'" + p.guarded_action + "' already requires slot '" + p.new_slot + "'");
  guarded.mandatory.push_back(p.new_slot);
  actions[p.provider_action] = SlotRequirement{SlotRule::kNone, 0, {}, {}};

  auto workflows = kb.workflows();
  std::vector<std::string> changed;
  for (auto& [name, spec] : workflows) {
    std::vector<std::string> next;
    next.reserve(spec.action_sequence.size() + 2);
    bool touched = false;
    for (const auto& action : spec.action_sequence) {
      if (action == p.guarded_action) {
        next.push_back(p.provider_action);
        touched = true;
      }
      next.push_back(action);
    }
    if (touched) {
      spec.action_sequence = std::move(next);
      changed.push_back(name);
    }
  }
  return {KnowledgeBase::from_parts(std::move(workflows), std::move(actions)), std::move(changed)};
}

}  // namespace flowplan
