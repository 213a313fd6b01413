#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "flowplan/kb.hpp"

namespace flowplan {

enum class OperatorKind { kGetSlot, kCompleteButton, kDoAction, kChooseFlow, kNextStep, kCompleteFlow };

using PropositionId = int;

struct Fact {
  PropositionId prop = 0;
  bool value = true;

  bool operator==(const Fact&) const = default;
};

struct Operator {
  std::string name;
  OperatorKind kind = OperatorKind::kDoAction;
  std::vector<Fact> preconditions;  // consistent: no proposition with both values
  std::vector<Fact> effects;        // consistent
};

// Total truth assignment over a problem's propositions, bit-packed.
class State {
 public:
  State() = default;
  explicit State(int num_props) : size_(num_props), bits_((num_props + 63) / 64, 0) {}

  int size() const { return size_; }
  bool value(PropositionId p) const { return (bits_[p >> 6] >> (p & 63)) & 1u; }
  void set(PropositionId p, bool v) {
    const std::uint64_t mask = std::uint64_t{1} << (p & 63);
    if (v)
      bits_[p >> 6] |= mask;
    else
      bits_[p >> 6] &= ~mask;
  }

  const std::vector<std::uint64_t>& words() const { return bits_; }
  bool operator==(const State&) const = default;

 private:
  int size_ = 0;
  std::vector<std::uint64_t> bits_;
};

struct StateHash {
  std::size_t operator()(const State& s) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (std::uint64_t w : s.words()) {
      h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdull;
    }
    return static_cast<std::size_t>(h);
  }
};

struct PlanningProblem {
  std::string name;
  std::vector<std::string> propositions;  // id -> name, unique
  std::vector<Operator> operators;
  State initial;
  std::vector<Fact> goal;

  std::unordered_map<std::string, PropositionId> prop_ids;  // name -> id

  PropositionId prop_id(const std::string& name) const;  // kUnknownProposition
  void index_propositions();                             // rebuilds prop_ids
};

struct Plan {
  std::vector<std::string> steps;  // operator names, in execution order
};

// A plan projected down to prompt-ready tokens: action names, optionally
// interleaved with the slot names gathered before each action.
struct ActionPlan {
  struct Entry {
    enum class Kind { kAction, kSlot };
    Kind kind = Kind::kAction;
    std::string name;
    bool operator==(const Entry&) const = default;
  };

  std::vector<Entry> entries;

  std::vector<std::string> actions() const;
  std::vector<std::string> tokens() const;  // all entry names in order
  bool empty() const { return entries.empty(); }
  bool operator==(const ActionPlan&) const = default;

  static ActionPlan from_actions(const std::vector<std::string>& actions);
};

bool applicable(const State& s, const Operator& o, const PlanningProblem& p);
State apply(const State& s, const Operator& o, const PlanningProblem& p);  // kNotApplicable
bool goal_satisfied(const State& s, const PlanningProblem& p);

// Compiles one workflow into a grounded propositional problem. Slots named in
// initial_slots start true; the goal is the flow's finished token.
PlanningProblem ground_problem(const KnowledgeBase& kb, const std::string& flow,
                               const std::vector<std::string>& initial_slots = {});

struct SolveOptions {
  std::size_t max_nodes = 1'000'000;
};

// Deterministic shortest plan: breadth-first search with lexicographic
// operator-name tie-breaking, then a just-in-time normalization that moves each
// get-slot step directly before its first consumer. Returns nullopt when the
// goal is unreachable; throws kSearchBudgetExceeded past the node cap.
std::optional<Plan> solve(const PlanningProblem& p, const SolveOptions& options = {});

// Replays a plan from the initial state; true iff every step is applicable and
// the final state satisfies the goal.
bool validate_plan(const PlanningProblem& p, const Plan& plan);

struct PddlText {
  std::string domain_text;
  std::string problem_text;
};

// Grounded STRIPS PDDL (no schemas); operator names encode spaces as "__".
PddlText emit_pddl(const PlanningProblem& p);
PlanningProblem load_pddl(const std::string& domain_text, const std::string& problem_text);

// Keeps `do action_*` steps (stripped to the action name); with include_slots
// also keeps `get-slot slot_*` steps rendered as slot names.
ActionPlan strip_plan(const Plan& plan, bool include_slots = false);

enum class PlanMode { kLookup, kReplan };

// Actions still required for the flow after consuming `executed` against the
// prescribed sequence. LOOKUP walks the stored sequence (off-script executed
// actions are skipped); REPLAN grounds a problem whose initial state marks the
// executed actions done and solves it.
ActionPlan remaining_plan(const KnowledgeBase& kb, const std::string& flow,
                          const std::vector<std::string>& executed, PlanMode mode,
                          bool include_slots = false);

}  // namespace flowplan
