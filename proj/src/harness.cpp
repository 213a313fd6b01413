#include "flowplan/harness.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace flowplan {

using nlohmann::json;
using nlohmann::ordered_json;

AgentKind agent_kind_from_name(const std::string& name) {
  if (name == "remote") return AgentKind::kRemote;
  if (name == "oracle") return AgentKind::kOracle;
  if (name == "plan-follower") return AgentKind::kPlanFollower;
  throw_error(Errc::kInvalidArgument, "unknown agent kind '" + name + "'");
}

namespace {

class OracleAgent : public Agent {
 public:
  std::string respond(const AgentQuery& query) override { return query.gold_target; }
};

// --- plan-follower helpers ---------------------------------------------------

// Positions of " marker" occurrences (or a marker at position 0).
size_t rfind_marker(const std::string& text, const std::string& marker) {
  size_t best = std::string::npos;
  size_t at = text.find(marker);
  while (at != std::string::npos) {
    if (at == 0 || text[at - 1] == ' ') best = at;
    at = text.find(marker, at + 1);
  }
  return best;
}

struct ContextView {
  std::string flow;
  bool has_plan = false;
  std::vector<std::string> plan;  // leading tokens of the remaining plan
  std::string history;
};

ContextView parse_context(const std::string& text) {
  ContextView view;
  const size_t plan_at = rfind_marker(text, "action_plan: ");
  size_t augmentation_start = text.size();
  if (plan_at != std::string::npos) {
    view.has_plan = true;
    const size_t begin = plan_at + 13;
    const size_t semi = text.find(';', begin);
    const std::string body = text.substr(begin, semi == std::string::npos ? std::string::npos
                                                                          : semi - begin);
    std::istringstream in(body);
    std::string token;
    while (std::getline(in, token, ',')) {
      const auto at = token.find_first_not_of(' ');
      if (at == std::string::npos) continue;
      auto end = token.find_last_not_of(' ');
      view.plan.push_back(token.substr(at, end - at + 1));
    }
    augmentation_start = plan_at;
  }
  const std::string head = text.substr(0, augmentation_start);
  const size_t flow_at = rfind_marker(head, "flow: ");
  if (flow_at != std::string::npos &&
      (flow_at < 6 || head.compare(flow_at - 6, 6, "legal_") != 0)) {
    const size_t begin = flow_at + 6;
    const size_t semi = head.find(';', begin);
    view.flow = head.substr(begin, semi == std::string::npos ? std::string::npos : semi - begin);
    view.history = head.substr(0, flow_at);
  } else {
    view.history = head;
  }
  return view;
}

// Mock stand-in for slot-value extraction: tokens from the newest customer turn
// not yet consumed by an action turn. Single-token utterances are taken
// verbatim; otherwise the trailing run of capitalized words, lowercased.
std::vector<std::string> guess_values(const std::string& history) {
  const size_t customer_at = rfind_marker(history, "customer: ");
  const size_t action_at = rfind_marker(history, "action: ");
  if (customer_at == std::string::npos) return {};
  if (action_at != std::string::npos && action_at > customer_at) return {};

  size_t end = history.size();
  for (const char* marker : {" agent: ", " customer: ", " action: "}) {
    const size_t next = history.find(marker, customer_at + 10);
    if (next != std::string::npos) end = std::min(end, next);
  }
  const std::string utterance = history.substr(customer_at + 10, end - (customer_at + 10));

  std::vector<std::string> tokens;
  std::istringstream in(utterance);
  std::string raw;
  while (in >> raw) {
    while (!raw.empty() && !std::isalnum(static_cast<unsigned char>(raw.back()))) raw.pop_back();
    size_t begin = 0;
    while (begin < raw.size() && !std::isalnum(static_cast<unsigned char>(raw[begin]))) ++begin;
    raw = raw.substr(begin);
    if (!raw.empty()) tokens.push_back(raw);
  }
  if (tokens.empty()) return {};

  auto lowered = [](std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  if (tokens.size() == 1) return {lowered(tokens[0])};

  std::vector<std::string> run;
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    if (std::isupper(static_cast<unsigned char>((*it)[0])))
      run.push_back(*it);
    else
      break;
  }
  if (run.empty()) return {};
  std::string value;
  for (auto it = run.rbegin(); it != run.rend(); ++it) {
    if (!value.empty()) value += ' ';
    value += lowered(*it);
  }
  return {value};
}

class PlanFollowerAgent : public Agent {
 public:
  std::string respond(const AgentQuery& query) override {
    const ContextView view = parse_context(query.context);
    if (!view.has_plan)
      throw_error(Errc::kMissingPlanInContext,
                  "plan-follower needs an action plan in the context (config with P)");
    if (query.expected_kind == ExpectedKind::kUtterance || view.plan.empty())
      return "flow: " + view.flow + "; agent: Okay, thank you.";
    std::string values;
    const auto guessed = guess_values(view.history);
    for (size_t i = 0; i < guessed.size(); ++i) {
      if (i) values += ", ";
      values += guessed[i];
    }
    return "flow: " + view.flow + "; action: " + view.plan.front() + ": " + values;
  }
};

}  // namespace

std::unique_ptr<Agent> make_remote_agent(const std::string& endpoint);  // remote_agent.cpp

std::unique_ptr<Agent> make_agent(const AgentClient& client) {
  switch (client.kind) {
    case AgentKind::kOracle: return std::make_unique<OracleAgent>();
    case AgentKind::kPlanFollower: return std::make_unique<PlanFollowerAgent>();
    case AgentKind::kRemote:
      if (client.endpoint.empty())
        throw_error(Errc::kInvalidArgument, "remote agent needs an endpoint");
      return make_remote_agent(client.endpoint);
  }
  throw_error(Errc::kInvalidArgument, "unknown agent kind");
}

RunConfig RunConfig::make(PromptConfig prompt, SplitSpec split, const KnowledgeBase& kb,
                          PlanMode plan_mode, int concurrency) {
  prompt.validate();
  RunConfig cfg;
  cfg.prompt = prompt;
  cfg.train_legal_flows = split.train_flows();
  cfg.test_legal_flows = kb.workflow_names();
  cfg.split = std::move(split);
  cfg.plan_mode = plan_mode;
  cfg.concurrency = concurrency;
  return cfg;
}

namespace {

GoldTarget gold_from_turn(const Turn& turn, const std::string& flow) {
  GoldTarget gold;
  gold.flow = flow;
  if (turn.is_action()) {
    gold.kind = ExpectedKind::kAction;
    gold.action_name = turn.action->name;
    gold.slot_values = turn.action->values;
  } else {
    gold.kind = ExpectedKind::kUtterance;
    gold.utterance = turn.utterance.value();
  }
  return gold;
}

}  // namespace

std::vector<PredictionRecord> predict_dialogue(Agent& agent, const Dialogue& d,
                                               const RunConfig& cfg, const KnowledgeBase& kb) {
  if (!kb.has_workflow(d.flow))
    throw_error(Errc::kUnknownFlow, "dialogue '" + d.id + "' has unknown flow '" + d.flow + "'");
  const Membership side = cfg.split.assignment.count(d.flow) ? cfg.split.membership(d.flow)
                                                             : Membership::kTrain;
  const auto& legal =
      side == Membership::kTest ? cfg.test_legal_flows : cfg.train_legal_flows;

  std::vector<PredictionRecord> records;
  std::vector<std::string> executed;
  for (size_t i = 0; i < d.turns.size(); ++i) {
    const Turn& turn = d.turns[i];
    if (turn.speaker == Speaker::kCustomer) continue;

    ActionPlan plan;
    if (cfg.prompt.include_plan)
      plan = remaining_plan(kb, d.flow, executed, cfg.plan_mode, cfg.prompt.include_plan_slots);
    const AugmentedContext ctx =
        build_context(d, i, cfg.prompt, legal, d.flow, cfg.prompt.include_plan ? &plan : nullptr);

    PredictionRecord record;
    record.dialogue_id = d.id;
    record.turn_index = static_cast<int>(i);
    record.expected_kind = turn.is_action() ? ExpectedKind::kAction : ExpectedKind::kUtterance;
    record.gold = gold_from_turn(turn, d.flow);

    AgentQuery query;
    query.context = ctx.text;
    query.expected_kind = record.expected_kind;
    query.gold_target = build_target(turn, d.flow);
    query.dialogue_id = d.id;
    query.turn_index = record.turn_index;
    record.raw_output = agent.respond(query);
    record.predicted = parse_prediction(record.raw_output, record.expected_kind, cfg.prompt);
    records.push_back(std::move(record));

    if (turn.is_action()) executed.push_back(turn.action->name);
  }
  return records;
}

std::vector<PredictionRecord> predict_dataset(const AgentClient& client,
                                              const std::vector<Dialogue>& dataset,
                                              const RunConfig& cfg, const KnowledgeBase& kb) {
  const int width = std::max(1, cfg.concurrency);
  std::vector<std::vector<PredictionRecord>> results(dataset.size());
  if (width == 1 || dataset.size() <= 1) {
    auto agent = make_agent(client);
    for (size_t i = 0; i < dataset.size(); ++i)
      results[i] = predict_dialogue(*agent, dataset[i], cfg, kb);
  } else {
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      try {
        auto agent = make_agent(client);
        while (true) {
          const size_t i = next.fetch_add(1);
          if (i >= dataset.size()) break;
          results[i] = predict_dialogue(*agent, dataset[i], cfg, kb);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    };
    std::vector<std::thread> threads;
    for (int w = 0; w < width; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  std::vector<PredictionRecord> flat;
  for (auto& part : results)
    for (auto& record : part) flat.push_back(std::move(record));
  return flat;
}

MetricsReport score_run(const std::vector<PredictionRecord>& records, const SplitSpec& split,
                        const KnowledgeBase& kb, const std::vector<Dialogue>& training_data,
                        bool with_exposure) {
  MetricsReport report;
  report.num_records = static_cast<int>(records.size());
  for (const auto& r : records)
    if (r.expected_kind == ExpectedKind::kAction) ++report.num_action_records;

  report.action_acc = action_accuracy(records);
  report.flow_acc = flow_accuracy(records);
  report.flow_prefix_acc = flow_prefix_accuracy(records, kb);

  // Levenshtein over dialogues: predicted actions come from every turn, gold
  // actions from gold action turns; zero-gold-action dialogues are excluded.
  std::map<std::string, std::vector<const PredictionRecord*>> by_dialogue;
  for (const auto& r : records) by_dialogue[r.dialogue_id].push_back(&r);
  report.num_dialogues = static_cast<int>(by_dialogue.size());
  long lev_sum = 0, lev_free_sum = 0;
  for (auto& [id, turns] : by_dialogue) {
    std::sort(turns.begin(), turns.end(),
              [](const PredictionRecord* a, const PredictionRecord* b) {
                return a->turn_index < b->turn_index;
              });
    std::vector<std::string> predicted, gold;
    for (const PredictionRecord* r : turns) {
      if (r->predicted.kind == PredictionKind::kAction && r->predicted.action_name)
        predicted.push_back(*r->predicted.action_name);
      if (r->expected_kind == ExpectedKind::kAction) gold.push_back(r->gold.action_name);
    }
    if (gold.empty()) {
      ++report.lev_excluded_no_gold_actions;
      continue;
    }
    ++report.lev_dialogues;
    lev_sum += levenshtein_actions(predicted, gold, false);
    lev_free_sum += levenshtein_actions(predicted, gold, true);
  }
  if (report.lev_dialogues > 0) {
    report.lev_act = static_cast<double>(lev_sum) / report.lev_dialogues;
    report.lev_act_free_del = static_cast<double>(lev_free_sum) / report.lev_dialogues;
  }

  const SlotOrderedAccuracy ordered = slot_accuracy_ordered(records);
  report.slot_mean = ordered.mean;
  report.slot_all = ordered.all;
  report.slot_set_expected = slot_set_metric(records, SlotDenominator::kExpected, false);
  report.slot_set_expected_with_empty = slot_set_metric(records, SlotDenominator::kExpected, true);
  report.slot_set_predicted = slot_set_metric(records, SlotDenominator::kPredicted, false);
  report.slot_set_longest = slot_set_metric(records, SlotDenominator::kLongest, false);
  report.slot_set_longest_with_empty = slot_set_metric(records, SlotDenominator::kLongest, true);

  report.action_matrix = action_confusion(records, kb);
  report.flow_matrix = flow_confusion(records, kb);
  report.per_turn = per_turn_flow_accuracy(records, kb);
  report.flow_source = flow_source_breakdown(records, split);
  if (with_exposure || !training_data.empty())
    report.exposure = action_exposure_breakdown(records, split, kb, training_data);
  return report;
}

std::vector<ContextRecord> build_context_records(const std::vector<Dialogue>& dataset,
                                                 const RunConfig& cfg, const KnowledgeBase& kb) {
  std::vector<ContextRecord> out;
  for (const Dialogue& d : dataset) {
    const Membership side = cfg.split.assignment.count(d.flow) ? cfg.split.membership(d.flow)
                                                               : Membership::kTrain;
    const auto& legal =
        side == Membership::kTest ? cfg.test_legal_flows : cfg.train_legal_flows;
    std::vector<std::string> executed;
    for (size_t i = 0; i < d.turns.size(); ++i) {
      const Turn& turn = d.turns[i];
      if (turn.speaker == Speaker::kCustomer) continue;
      ActionPlan plan;
      if (cfg.prompt.include_plan)
        plan = remaining_plan(kb, d.flow, executed, cfg.plan_mode, cfg.prompt.include_plan_slots);
      const AugmentedContext ctx =
          build_context(d, i, cfg.prompt, legal, d.flow, cfg.prompt.include_plan ? &plan : nullptr);
      out.push_back({d.id, static_cast<int>(i), ctx.text, build_target(turn, d.flow)});
      if (turn.is_action()) executed.push_back(turn.action->name);
    }
  }
  return out;
}

std::string context_records_to_jsonl(const std::vector<ContextRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    ordered_json node;
    node["id"] = r.dialogue_id;
    node["turn"] = r.turn_index;
    node["context"] = r.context;
    node["target"] = r.target;
    out += node.dump();
    out += '\n';
  }
  return out;
}

std::string records_to_jsonl(const std::vector<PredictionRecord>& records,
                             const PromptConfig& cfg) {
  std::string out;
  for (const auto& r : records) {
    ordered_json node;
    node["id"] = r.dialogue_id;
    node["turn"] = r.turn_index;
    node["expected"] = expected_kind_name(r.expected_kind);
    node["config"] = cfg.to_string();
    ordered_json gold;
    gold["flow"] = r.gold.flow;
    if (r.gold.kind == ExpectedKind::kAction) {
      gold["action"] = r.gold.action_name;
      gold["values"] = r.gold.slot_values;
    } else {
      gold["utterance"] = r.gold.utterance;
    }
    node["gold"] = std::move(gold);
    node["output"] = r.raw_output;
    out += node.dump();
    out += '\n';
  }
  return out;
}

std::vector<PredictionRecord> records_from_jsonl(const std::string& text, PromptConfig* cfg_out) {
  std::vector<PredictionRecord> records;
  PromptConfig cfg;
  bool cfg_seen = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json node = json::parse(line);
      PredictionRecord r;
      r.dialogue_id = node.at("id").get<std::string>();
      r.turn_index = node.at("turn").get<int>();
      r.expected_kind = expected_kind_from_name(node.at("expected").get<std::string>());
      const PromptConfig line_cfg = PromptConfig::from_string(node.value("config", "none"));
      if (!cfg_seen) {
        cfg = line_cfg;
        cfg_seen = true;
      } else if (!(line_cfg == cfg)) {
        throw_error(Errc::kMalformedDocument, "mixed prompt configs in prediction file");
      }
      const json& gold = node.at("gold");
      r.gold.flow = gold.at("flow").get<std::string>();
      r.gold.kind = r.expected_kind;
      if (r.expected_kind == ExpectedKind::kAction) {
        r.gold.action_name = gold.at("action").get<std::string>();
        r.gold.slot_values = gold.value("values", std::vector<std::string>{});
      } else {
        r.gold.utterance = gold.value("utterance", std::string{});
      }
      r.raw_output = node.at("output").get<std::string>();
      r.predicted = parse_prediction(r.raw_output, r.expected_kind, cfg);
      records.push_back(std::move(r));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw_error(Errc::kMalformedDocument, e.what());
    }
  }
  if (cfg_out) *cfg_out = cfg;
  return records;
}

}  // namespace flowplan
