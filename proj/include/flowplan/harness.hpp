#pragma once

#include <memory>
#include <string>
#include <vector>

#include "flowplan/metrics.hpp"
#include "flowplan/planner.hpp"
#include "flowplan/prompt.hpp"

namespace flowplan {

enum class AgentKind { kRemote, kOracle, kPlanFollower };

AgentKind agent_kind_from_name(const std::string& name);

struct AgentClient {
  AgentKind kind = AgentKind::kOracle;
  std::string endpoint;  // remote only
  unsigned seed = 0;     // mocks
};

// One teacher-forced turn. Mocks may read expected_kind and gold_target (they
// are test doubles); the remote client sends only the context string.
struct AgentQuery {
  std::string context;
  ExpectedKind expected_kind = ExpectedKind::kUtterance;
  std::string gold_target;
  std::string dialogue_id;
  int turn_index = 0;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string respond(const AgentQuery& query) = 0;
};

// Remote agents need a reachable endpoint; the factory throws on a bad client.
std::unique_ptr<Agent> make_agent(const AgentClient& client);

struct RunConfig {
  PromptConfig prompt;
  SplitSpec split;
  PlanMode plan_mode = PlanMode::kLookup;
  std::vector<std::string> train_legal_flows;  // shown to training-side dialogues
  std::vector<std::string> test_legal_flows;   // full list, shown at test time
  int concurrency = 1;

  // Fills the legal-flow lists from the split (train side) and KB (full list).
  static RunConfig make(PromptConfig prompt, SplitSpec split, const KnowledgeBase& kb,
                        PlanMode plan_mode = PlanMode::kLookup, int concurrency = 1);
};

// Teacher forcing: every agent/action gold turn becomes one query with the gold
// history (and gold-derived plan) as context; model outputs never feed back.
std::vector<PredictionRecord> predict_dialogue(Agent& agent, const Dialogue& d,
                                               const RunConfig& cfg, const KnowledgeBase& kb);

// Dialogue-parallel driver; results are concatenated in dataset order no matter
// the concurrency width.
std::vector<PredictionRecord> predict_dataset(const AgentClient& client,
                                              const std::vector<Dialogue>& dataset,
                                              const RunConfig& cfg, const KnowledgeBase& kb);

MetricsReport score_run(const std::vector<PredictionRecord>& records, const SplitSpec& split,
                        const KnowledgeBase& kb, const std::vector<Dialogue>& training_data = {},
                        bool with_exposure = false);

struct ContextRecord {
  std::string dialogue_id;
  int turn_index = 0;
  std::string context;
  std::string target;
};

// The context/target pairs a run would query, without querying anything.
std::vector<ContextRecord> build_context_records(const std::vector<Dialogue>& dataset,
                                                 const RunConfig& cfg, const KnowledgeBase& kb);
std::string context_records_to_jsonl(const std::vector<ContextRecord>& records);

// Prediction records as JSON lines (raw output plus the prompt config, so they
// can be re-parsed and scored later).
std::string records_to_jsonl(const std::vector<PredictionRecord>& records,
                             const PromptConfig& cfg);
std::vector<PredictionRecord> records_from_jsonl(const std::string& text, PromptConfig* cfg_out);

}  // namespace flowplan
