#include "flowplan/planner.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

namespace flowplan {

namespace {

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

std::string token_after(const std::string& name, size_t prefix_len) {
  const auto end = name.find(' ', prefix_len);
  return name.substr(prefix_len, end == std::string::npos ? std::string::npos : end - prefix_len);
}

}  // namespace

PropositionId PlanningProblem::prop_id(const std::string& prop_name) const {
  auto it = prop_ids.find(prop_name);
  if (it == prop_ids.end())
    throw_error(Errc::kUnknownProposition, "no proposition named '" + prop_name + "'");
  return it->second;
}

void PlanningProblem::index_propositions() {
  prop_ids.clear();
  for (size_t i = 0; i < propositions.size(); ++i)
    prop_ids[propositions[i]] = static_cast<PropositionId>(i);
}

std::vector<std::string> ActionPlan::actions() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (e.kind == Entry::Kind::kAction) out.push_back(e.name);
  return out;
}

std::vector<std::string> ActionPlan::tokens() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.name);
  return out;
}

ActionPlan ActionPlan::from_actions(const std::vector<std::string>& actions) {
  ActionPlan plan;
  plan.entries.reserve(actions.size());
  for (const auto& a : actions) plan.entries.push_back({Entry::Kind::kAction, a});
  return plan;
}

bool applicable(const State& s, const Operator& o, const PlanningProblem& p) {
  for (const Fact& f : o.preconditions) {
    if (f.prop < 0 || f.prop >= static_cast<PropositionId>(p.propositions.size()))
      throw_error(Errc::kUnknownProposition, "operator '" + o.name + "' references proposition #" +
                                                 std::to_string(f.prop));
    if (s.value(f.prop) != f.value) return false;
  }
  return true;
}

State apply(const State& s, const Operator& o, const PlanningProblem& p) {
  if (!applicable(s, o, p))
    throw_error(Errc::kNotApplicable, "operator '" + o.name + "' is not applicable");
  State next = s;
  for (const Fact& f : o.effects) {
    if (f.prop < 0 || f.prop >= static_cast<PropositionId>(p.propositions.size()))
      throw_error(Errc::kUnknownProposition, "operator '" + o.name + "' references proposition #" +
                                                 std::to_string(f.prop));
    next.set(f.prop, f.value);
  }
  return next;
}

bool goal_satisfied(const State& s, const PlanningProblem& p) {
  for (const Fact& f : p.goal)
    if (s.value(f.prop) != f.value) return false;
  return true;
}

PlanningProblem ground_problem(const KnowledgeBase& kb, const std::string& flow,
                               const std::vector<std::string>& initial_slots) {
  const WorkflowSpec& spec = kb.workflow(flow);
  const auto& seq = spec.action_sequence;

  std::set<std::string> slot_set(initial_slots.begin(), initial_slots.end());
  std::vector<std::string> distinct_actions;
  for (const auto& action : seq) {
    if (std::find(distinct_actions.begin(), distinct_actions.end(), action) ==
        distinct_actions.end())
      distinct_actions.push_back(action);
    for (const auto& combo : kb.action(action).combinations())
      slot_set.insert(combo.begin(), combo.end());
  }

  PlanningProblem p;
  p.name = "flow_" + flow;
  for (const auto& slot : slot_set) p.propositions.push_back("slot_" + slot);
  for (const auto& action : distinct_actions) {
    p.propositions.push_back("button-done_" + action);
    p.propositions.push_back("did-" + action);
  }
  const size_t steps = seq.size();
  for (size_t i = 0; i <= steps; ++i)
    p.propositions.push_back("flow-step_" + flow + "_s" + std::to_string(i));
  p.propositions.push_back("finished-flow_" + flow);
  p.index_propositions();

  auto step_prop = [&](size_t i) { return p.prop_id("flow-step_" + flow + "_s" + std::to_string(i)); };

  for (const auto& slot : slot_set) {
    Operator op;
    op.name = "get-slot slot_" + slot;
    op.kind = OperatorKind::kGetSlot;
    op.effects = {{p.prop_id("slot_" + slot), true}};
    p.operators.push_back(std::move(op));
  }

  // One completion per admissible slot combination, gated on the occurrence's
  // step token so optimal plans execute the flow's actions in order.
  std::map<std::string, int> occurrences;
  for (const auto& action : seq) ++occurrences[action];
  for (size_t i = 0; i < steps; ++i) {
    const auto& action = seq[i];
    for (const auto& combo : kb.action(action).combinations()) {
      Operator op;
      op.kind = OperatorKind::kCompleteButton;
      std::string name = "complete-button-slot button_" + action;
      for (const auto& slot : combo) name += " slot_" + slot;
      if (occurrences[action] > 1) name += " s_" + std::to_string(i);
      op.name = std::move(name);
      op.preconditions.push_back({step_prop(i), true});
      for (const auto& slot : combo) op.preconditions.push_back({p.prop_id("slot_" + slot), true});
      op.effects = {{p.prop_id("button-done_" + action), true}};
      p.operators.push_back(std::move(op));
    }
  }

  for (const auto& action : distinct_actions) {
    Operator op;
    op.name = "do action_" + action;
    op.kind = OperatorKind::kDoAction;
    op.preconditions = {{p.prop_id("button-done_" + action), true}};
    op.effects = {{p.prop_id("did-" + action), true}};
    p.operators.push_back(std::move(op));
  }

  Operator choose;
  choose.name = "choose-flow flow_" + flow;
  choose.kind = OperatorKind::kChooseFlow;
  choose.effects = {{step_prop(0), true}};
  p.operators.push_back(std::move(choose));

  for (size_t i = 0; i < steps; ++i) {
    Operator op;
    op.name = "next-step-flow flow_" + flow + " s_" + std::to_string(i) + " s_" +
              std::to_string(i + 1) + " button_" + seq[i];
    op.kind = OperatorKind::kNextStep;
    const PropositionId did = p.prop_id("did-" + seq[i]);
    const PropositionId button = p.prop_id("button-done_" + seq[i]);
    op.preconditions = {{step_prop(i), true}, {did, true}};
    // Consuming the step's tokens makes a repeated action need a fresh
    // completion at its own step.
    op.effects = {{step_prop(i), false},
                  {step_prop(i + 1), true},
                  {did, false},
                  {button, false}};
    p.operators.push_back(std::move(op));
  }

  Operator finish;
  finish.name = "complete-flow flow_" + flow + " s_" + std::to_string(steps);
  finish.kind = OperatorKind::kCompleteFlow;
  finish.preconditions = {{step_prop(steps), true}};
  finish.effects = {{p.prop_id("finished-flow_" + flow), true}};
  p.operators.push_back(std::move(finish));

  p.initial = State(static_cast<int>(p.propositions.size()));
  for (const auto& slot : initial_slots) p.initial.set(p.prop_id("slot_" + slot), true);
  p.goal = {{p.prop_id("finished-flow_" + flow), true}};
  return p;
}

namespace {

// Moves each precondition-free, single-effect get-slot step to sit directly
// before the first later step that touches its slot. Slot facts are only ever
// positive preconditions in grounded problems, so this preserves validity
// while matching the slots-then-complete shape of emitted plans.
std::vector<int> normalize_slot_order(const PlanningProblem& p, const std::vector<int>& plan) {
  const int n = static_cast<int>(plan.size());
  std::vector<std::vector<int>> before(static_cast<size_t>(n));
  std::vector<bool> moved(static_cast<size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    const Operator& op = p.operators[static_cast<size_t>(plan[static_cast<size_t>(i)])];
    if (op.kind != OperatorKind::kGetSlot || !op.preconditions.empty() || op.effects.size() != 1 ||
        !op.effects[0].value)
      continue;
    const PropositionId prop = op.effects[0].prop;
    for (int j = i + 1; j < n; ++j) {
      const Operator& later = p.operators[static_cast<size_t>(plan[static_cast<size_t>(j)])];
      auto touches = [prop](const std::vector<Fact>& facts) {
        for (const Fact& f : facts)
          if (f.prop == prop) return true;
        return false;
      };
      if (touches(later.preconditions) || touches(later.effects)) {
        before[static_cast<size_t>(j)].push_back(i);
        moved[static_cast<size_t>(i)] = true;
        break;
      }
    }
  }
  std::vector<int> out;
  out.reserve(plan.size());
  for (int j = 0; j < n; ++j) {
    for (int i : before[static_cast<size_t>(j)]) out.push_back(plan[static_cast<size_t>(i)]);
    if (!moved[static_cast<size_t>(j)]) out.push_back(plan[static_cast<size_t>(j)]);
  }
  return out;
}

}  // namespace

std::optional<Plan> solve(const PlanningProblem& p, const SolveOptions& options) {
  if (goal_satisfied(p.initial, p)) return Plan{};

  std::vector<int> order(p.operators.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return p.operators[static_cast<size_t>(a)].name < p.operators[static_cast<size_t>(b)].name;
  });

  std::vector<State> states{p.initial};
  std::vector<std::pair<int, int>> parents{{-1, -1}};  // (parent state index, operator index)
  std::unordered_map<State, int, StateHash> seen;
  seen.reserve(1 << 12);
  seen.emplace(p.initial, 0);
  std::deque<int> queue{0};
  std::size_t generated = 1;

  auto reconstruct = [&](int leaf) {
    std::vector<int> ops;
    for (int at = leaf; parents[static_cast<size_t>(at)].first >= 0;
         at = parents[static_cast<size_t>(at)].first)
      ops.push_back(parents[static_cast<size_t>(at)].second);
    std::reverse(ops.begin(), ops.end());
    ops = normalize_slot_order(p, ops);
    Plan plan;
    plan.steps.reserve(ops.size());
    for (int oi : ops) plan.steps.push_back(p.operators[static_cast<size_t>(oi)].name);
    return plan;
  };

  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    const State s = states[static_cast<size_t>(cur)];
    for (int oi : order) {
      const Operator& op = p.operators[static_cast<size_t>(oi)];
      if (!applicable(s, op, p)) continue;
      State next = apply(s, op, p);
      auto [it, inserted] = seen.try_emplace(std::move(next), static_cast<int>(states.size()));
      if (!inserted) continue;
      if (++generated > options.max_nodes)
        throw_error(Errc::kSearchBudgetExceeded,
                    "exceeded " + std::to_string(options.max_nodes) + " generated states");
      states.push_back(it->first);
      parents.emplace_back(cur, oi);
      if (goal_satisfied(states.back(), p)) {
        Plan plan = reconstruct(static_cast<int>(states.size()) - 1);
        if (!validate_plan(p, plan)) {
          // Normalization is provably safe for grounded problems; fall back for
          // loaded problems with exotic operators.
          Plan raw;
          for (int at = static_cast<int>(states.size()) - 1;
               parents[static_cast<size_t>(at)].first >= 0;
               at = parents[static_cast<size_t>(at)].first)
            raw.steps.push_back(p.operators[static_cast<size_t>(parents[static_cast<size_t>(at)].second)].name);
          std::reverse(raw.steps.begin(), raw.steps.end());
          return raw;
        }
        return plan;
      }
      queue.push_back(static_cast<int>(states.size()) - 1);
    }
  }
  return std::nullopt;
}

bool validate_plan(const PlanningProblem& p, const Plan& plan) {
  std::unordered_map<std::string, int> by_name;
  for (size_t i = 0; i < p.operators.size(); ++i) by_name[p.operators[i].name] = static_cast<int>(i);
  State s = p.initial;
  for (const auto& step : plan.steps) {
    auto it = by_name.find(step);
    if (it == by_name.end()) return false;
    const Operator& op = p.operators[static_cast<size_t>(it->second)];
    if (!applicable(s, op, p)) return false;
    s = apply(s, op, p);
  }
  return goal_satisfied(s, p);
}

namespace {

std::string encode_pddl_name(const std::string& name) {
  std::string out;
  out.reserve(name.size() + 8);
  for (char c : name) {
    if (c == ' ')
      out += "__";
    else
      out += c;
  }
  return out;
}

std::string decode_pddl_name(const std::string& name) {
  std::string out;
  for (size_t i = 0; i < name.size(); ++i) {
    if (name[i] == '_' && i + 1 < name.size() && name[i + 1] == '_') {
      out += ' ';
      ++i;
    } else {
      out += name[i];
    }
  }
  return out;
}

void write_condition(std::ostream& os, const PlanningProblem& p, const std::vector<Fact>& facts) {
  os << "(and";
  for (const Fact& f : facts) {
    if (f.value)
      os << " (" << p.propositions[static_cast<size_t>(f.prop)] << ")";
    else
      os << " (not (" << p.propositions[static_cast<size_t>(f.prop)] << "))";
  }
  os << ")";
}

OperatorKind kind_from_name(const std::string& name) {
  if (starts_with(name, "get-slot")) return OperatorKind::kGetSlot;
  if (starts_with(name, "complete-button")) return OperatorKind::kCompleteButton;
  if (starts_with(name, "do ")) return OperatorKind::kDoAction;
  if (starts_with(name, "choose-flow")) return OperatorKind::kChooseFlow;
  if (starts_with(name, "next-step")) return OperatorKind::kNextStep;
  if (starts_with(name, "complete-flow")) return OperatorKind::kCompleteFlow;
  return OperatorKind::kDoAction;
}

// Minimal s-expression reader for the grounded PDDL subset emitted above.
struct Sexp {
  std::string atom;
  std::vector<Sexp> list;
  bool is_atom = false;
};

std::vector<std::string> tokenize_sexp(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == ';') {  // comment to end of line
      flush();
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '(' || c == ')') {
      flush();
      tokens.push_back(std::string(1, c));
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      current += c;
    }
  }
  flush();
  return tokens;
}

Sexp parse_sexp(const std::vector<std::string>& tokens, size_t& pos) {
  if (pos >= tokens.size()) throw_error(Errc::kMalformedDocument, "unexpected end of PDDL text");
  if (tokens[pos] == "(") {
    Sexp node;
    ++pos;
    while (pos < tokens.size() && tokens[pos] != ")") node.list.push_back(parse_sexp(tokens, pos));
    if (pos >= tokens.size()) throw_error(Errc::kMalformedDocument, "unbalanced parentheses");
    ++pos;
    return node;
  }
  Sexp node;
  node.is_atom = true;
  node.atom = tokens[pos++];
  return node;
}

Sexp parse_single_sexp(const std::string& text) {
  const auto tokens = tokenize_sexp(text);
  size_t pos = 0;
  Sexp root = parse_sexp(tokens, pos);
  if (pos != tokens.size()) throw_error(Errc::kMalformedDocument, "trailing tokens in PDDL text");
  return root;
}

std::vector<Fact> parse_condition(const Sexp& node, const PlanningProblem& p) {
  std::vector<Fact> facts;
  auto add = [&](const Sexp& clause) {
    if (clause.list.empty()) throw_error(Errc::kMalformedDocument, "empty condition clause");
    if (clause.list[0].is_atom && clause.list[0].atom == "not") {
      const Sexp& inner = clause.list.at(1);
      facts.push_back({p.prop_id(inner.list.at(0).atom), false});
    } else {
      facts.push_back({p.prop_id(clause.list[0].atom), true});
    }
  };
  if (!node.list.empty() && node.list[0].is_atom && node.list[0].atom == "and") {
    for (size_t i = 1; i < node.list.size(); ++i) add(node.list[i]);
  } else if (!node.list.empty()) {
    add(node);
  }
  return facts;
}

}  // namespace

PddlText emit_pddl(const PlanningProblem& p) {
  const std::string domain = p.name.empty() ? std::string("flowplan") : p.name;
  bool negative = false;
  for (const auto& op : p.operators)
    for (const Fact& f : op.preconditions)
      if (!f.value) negative = true;
  for (const Fact& f : p.goal)
    if (!f.value) negative = true;

  std::ostringstream dom;
  dom << "(define (domain " << domain << ")\n";
  dom << "  (:requirements :strips" << (negative ? " :negative-preconditions" : "") << ")\n";
  dom << "  (:predicates\n";
  for (const auto& prop : p.propositions) dom << "    (" << prop << ")\n";
  dom << "  )\n";
  for (const auto& op : p.operators) {
    dom << "  (:action " << encode_pddl_name(op.name) << "\n";
    dom << "    :parameters ()\n";
    dom << "    :precondition ";
    write_condition(dom, p, op.preconditions);
    dom << "\n    :effect ";
    write_condition(dom, p, op.effects);
    dom << "\n  )\n";
  }
  dom << ")\n";

  std::ostringstream prob;
  prob << "(define (problem " << domain << "-problem)\n";
  prob << "  (:domain " << domain << ")\n";
  prob << "  (:init";
  for (size_t i = 0; i < p.propositions.size(); ++i)
    if (p.initial.value(static_cast<PropositionId>(i))) prob << " (" << p.propositions[i] << ")";
  prob << ")\n";
  prob << "  (:goal ";
  write_condition(prob, p, p.goal);
  prob << ")\n)\n";

  return {dom.str(), prob.str()};
}

PlanningProblem load_pddl(const std::string& domain_text, const std::string& problem_text) {
  const Sexp dom = parse_single_sexp(domain_text);
  PlanningProblem p;
  if (dom.list.size() < 2 || !dom.list[0].is_atom || dom.list[0].atom != "define")
    throw_error(Errc::kMalformedDocument, "domain text must start with (define (domain ...))");
  p.name = dom.list[1].list.at(1).atom;

  std::vector<Sexp> action_nodes;
  for (size_t i = 2; i < dom.list.size(); ++i) {
    const Sexp& section = dom.list[i];
    if (section.list.empty() || !section.list[0].is_atom) continue;
    if (section.list[0].atom == ":predicates") {
      for (size_t j = 1; j < section.list.size(); ++j)
        p.propositions.push_back(section.list[j].list.at(0).atom);
    } else if (section.list[0].atom == ":action") {
      action_nodes.push_back(section);
    }
  }
  p.index_propositions();

  for (const Sexp& node : action_nodes) {
    Operator op;
    op.name = decode_pddl_name(node.list.at(1).atom);
    op.kind = kind_from_name(op.name);
    for (size_t i = 2; i + 1 < node.list.size(); i += 2) {
      const std::string key = node.list[i].atom;
      const Sexp& value = node.list[i + 1];
      if (key == ":precondition")
        op.preconditions = parse_condition(value, p);
      else if (key == ":effect")
        op.effects = parse_condition(value, p);
    }
    p.operators.push_back(std::move(op));
  }

  const Sexp prob = parse_single_sexp(problem_text);
  p.initial = State(static_cast<int>(p.propositions.size()));
  for (size_t i = 2; i < prob.list.size(); ++i) {
    const Sexp& section = prob.list[i];
    if (section.list.empty() || !section.list[0].is_atom) continue;
    if (section.list[0].atom == ":init") {
      for (size_t j = 1; j < section.list.size(); ++j)
        p.initial.set(p.prop_id(section.list[j].list.at(0).atom), true);
    } else if (section.list[0].atom == ":goal") {
      p.goal = parse_condition(section.list.at(1), p);
    }
  }
  return p;
}

ActionPlan strip_plan(const Plan& plan, bool include_slots) {
  ActionPlan out;
  for (const auto& step : plan.steps) {
    if (starts_with(step, "do action_")) {
      out.entries.push_back({ActionPlan::Entry::Kind::kAction, token_after(step, 10)});
    } else if (include_slots && starts_with(step, "get-slot slot_")) {
      out.entries.push_back({ActionPlan::Entry::Kind::kSlot, token_after(step, 14)});
    }
  }
  return out;
}

ActionPlan remaining_plan(const KnowledgeBase& kb, const std::string& flow,
                          const std::vector<std::string>& executed, PlanMode mode,
                          bool include_slots) {
  const WorkflowSpec& spec = kb.workflow(flow);
  if (mode == PlanMode::kLookup) {
    const auto& seq = spec.action_sequence;
    size_t matched = 0;
    for (const auto& action : executed)
      if (matched < seq.size() && seq[matched] == action) ++matched;
    const std::vector<std::string> rest{seq.begin() + static_cast<long>(matched), seq.end()};
    if (!include_slots) return ActionPlan::from_actions(rest);
    ActionPlan plan;
    std::set<std::string> gathered;
    for (const auto& action : rest) {
      for (const auto& slot : kb.action(action).combinations().front())
        if (gathered.insert(slot).second)
          plan.entries.push_back({ActionPlan::Entry::Kind::kSlot, slot});
      plan.entries.push_back({ActionPlan::Entry::Kind::kAction, action});
    }
    return plan;
  }

  PlanningProblem p = ground_problem(kb, flow, {});
  for (const auto& action : executed) {
    auto button = p.prop_ids.find("button-done_" + action);
    auto did = p.prop_ids.find("did-" + action);
    if (button == p.prop_ids.end() || did == p.prop_ids.end()) continue;  // off-script action
    p.initial.set(button->second, true);
    p.initial.set(did->second, true);
  }
  auto plan = solve(p);
  if (!plan)
    throw_error(Errc::kUnsolvable, "no plan completes flow '" + flow + "' from the executed prefix");
  return strip_plan(*plan, include_slots);
}

}  // namespace flowplan
