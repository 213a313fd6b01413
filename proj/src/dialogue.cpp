#include "flowplan/dialogue.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "flowplan/fixtures.hpp"
#include "json.hpp"

namespace flowplan {

using nlohmann::json;
using nlohmann::ordered_json;

Turn Turn::agent(std::string text) {
  Turn t;
  t.speaker = Speaker::kAgent;
  t.utterance = std::move(text);
  return t;
}

Turn Turn::customer(std::string text) {
  Turn t;
  t.speaker = Speaker::kCustomer;
  t.utterance = std::move(text);
  return t;
}

Turn Turn::act(std::string name, std::vector<std::string> values) {
  Turn t;
  t.speaker = Speaker::kAction;
  t.action = ActionCall{std::move(name), std::move(values)};
  return t;
}

std::string serialize_turn(const Turn& t) {
  switch (t.speaker) {
    case Speaker::kAgent:
      return "agent: " + t.utterance.value();
    case Speaker::kCustomer:
      return "customer: " + t.utterance.value();
    case Speaker::kAction: {
      const ActionCall& call = t.action.value();
      std::string out = "action: " + call.name + ": ";
      for (size_t i = 0; i < call.values.size(); ++i) {
        if (i) out += ", ";
        out += call.values[i];
      }
      return out;
    }
  }
  return {};
}

std::string serialize_history(const Dialogue& d, std::size_t upto) {
  if (upto > d.turns.size())
    throw_error(Errc::kInvalidArgument, "history bound past the end of dialogue '" + d.id + "'");
  std::string out;
  for (size_t i = 0; i < upto; ++i) {
    if (i) out += ' ';
    out += serialize_turn(d.turns[i]);
  }
  return out;
}

namespace {

json turn_to_json(const Turn& t) {
  json node;
  switch (t.speaker) {
    case Speaker::kAgent:
      node["speaker"] = "agent";
      node["text"] = t.utterance.value();
      break;
    case Speaker::kCustomer:
      node["speaker"] = "customer";
      node["text"] = t.utterance.value();
      break;
    case Speaker::kAction:
      node["speaker"] = "action";
      node["name"] = t.action->name;
      node["values"] = t.action->values;
      break;
  }
  return node;
}

Turn turn_from_json(const json& node) {
  const std::string speaker = node.at("speaker").get<std::string>();
  if (speaker == "agent") return Turn::agent(node.at("text").get<std::string>());
  if (speaker == "customer") return Turn::customer(node.at("text").get<std::string>());
  if (speaker == "action")
    return Turn::act(node.at("name").get<std::string>(),
                     node.value("values", std::vector<std::string>{}));
  throw_error(Errc::kMalformedDocument, "unknown speaker '" + speaker + "'");
}

}  // namespace

std::string dialogue_to_json(const Dialogue& d) {
  ordered_json node;
  node["id"] = d.id;
  node["flow"] = d.flow;
  json turns = json::array();
  for (const Turn& t : d.turns) turns.push_back(turn_to_json(t));
  node["turns"] = std::move(turns);
  return node.dump();
}

Dialogue dialogue_from_json(const std::string& line) {
  try {
    const json node = json::parse(line);
    Dialogue d;
    d.id = node.at("id").get<std::string>();
    d.flow = node.at("flow").get<std::string>();
    for (const json& t : node.at("turns")) d.turns.push_back(turn_from_json(t));
    if (d.turns.empty())
      throw_error(Errc::kMalformedDocument, "dialogue '" + d.id + "' has no turns");
    return d;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw_error(Errc::kMalformedDocument, e.what());
  }
}

std::vector<Dialogue> load_dialogues_jsonl(const std::string& text) {
  std::vector<Dialogue> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(dialogue_from_json(line));
  }
  return out;
}

std::string dialogues_to_jsonl(const std::vector<Dialogue>& dialogues) {
  std::string out;
  for (const Dialogue& d : dialogues) {
    out += dialogue_to_json(d);
    out += '\n';
  }
  return out;
}

const char* split_kind_name(SplitKind kind) {
  switch (kind) {
    case SplitKind::kStandard: return "standard";
    case SplitKind::kSplit1: return "split1";
    case SplitKind::kSplit2: return "split2";
    case SplitKind::kSplit3: return "split3";
  }
  return "standard";
}

SplitKind split_kind_from_name(const std::string& name) {
  if (name == "standard") return SplitKind::kStandard;
  if (name == "split1") return SplitKind::kSplit1;
  if (name == "split2") return SplitKind::kSplit2;
  if (name == "split3") return SplitKind::kSplit3;
  throw_error(Errc::kInvalidArgument, "unknown split kind '" + name + "'");
}

namespace {

const char* membership_name(Membership m) {
  switch (m) {
    case Membership::kTrain: return "train";
    case Membership::kTest: return "test";
    case Membership::kBoth: return "both";
  }
  return "train";
}

Membership membership_from_name(const std::string& name) {
  if (name == "train") return Membership::kTrain;
  if (name == "test") return Membership::kTest;
  if (name == "both") return Membership::kBoth;
  throw_error(Errc::kMalformedDocument, "unknown membership '" + name + "'");
}

}  // namespace

Membership SplitSpec::membership(const std::string& flow) const {
  auto it = assignment.find(flow);
  if (it == assignment.end())
    throw_error(Errc::kUnknownFlow, "flow '" + flow + "' is not in the split assignment");
  return it->second;
}

std::vector<std::string> SplitSpec::train_flows() const {
  std::vector<std::string> out;
  for (const auto& [flow, m] : assignment)
    if (m == Membership::kTrain || m == Membership::kBoth) out.push_back(flow);
  return out;
}

std::vector<std::string> SplitSpec::test_flows() const {
  std::vector<std::string> out;
  for (const auto& [flow, m] : assignment)
    if (m == Membership::kTest || m == Membership::kBoth) out.push_back(flow);
  return out;
}

std::vector<std::string> SplitSpec::test_only_flows() const {
  std::vector<std::string> out;
  for (const auto& [flow, m] : assignment)
    if (m == Membership::kTest) out.push_back(flow);
  return out;
}

SplitReport validate_split(const SplitSpec& spec, const KnowledgeBase& kb) {
  SplitReport report;
  if (spec.kind == SplitKind::kStandard) return report;

  std::vector<std::string> train, test;
  for (const auto& [flow, m] : spec.assignment) {
    if (m == Membership::kBoth) {
      report.violations.push_back({SplitViolation::Type::kFlowOverlap, flow, flow,
                                   "flow '" + flow + "' assigned to both sides"});
      continue;
    }
    (m == Membership::kTest ? test : train).push_back(flow);
  }

  if (spec.kind == SplitKind::kSplit1) return report;

  for (const auto& t : test) {
    const auto& test_seq = kb.workflow(t).action_sequence;
    for (const auto& tr : train) {
      const WorkflowSpec& train_spec = kb.workflow(tr);
      if (train_spec.action_sequence == test_seq) {
        report.violations.push_back({SplitViolation::Type::kSequenceOverlap, t, tr,
                                     "test flow '" + t + "' shares its action sequence with training flow '" +
                                         tr + "'"});
      }
      if (spec.kind == SplitKind::kSplit3 && train_spec.group == kb.workflow(t).group &&
          train_spec.prefix == kb.workflow(t).prefix) {
        report.violations.push_back({SplitViolation::Type::kPrefixOverlap, t, tr,
                                     "test flow '" + t + "' shares prefix group '" + train_spec.prefix +
                                         "' with training flow '" + tr + "'"});
      }
    }
  }
  return report;
}

namespace {

// Greedy generator for non-canonical KBs: units that must stay on one side are
// assigned one by one to whichever side keeps each prefix group closest to an
// even split.
SplitSpec generate_split(const std::vector<Dialogue>& dataset, const KnowledgeBase& kb,
                         SplitKind kind) {
  SplitSpec spec;
  spec.kind = kind;

  std::map<std::string, double> weight;
  for (const auto& [name, w] : kb.workflows()) weight[name] = 1.0;
  for (const Dialogue& d : dataset)
    if (weight.count(d.flow)) weight[d.flow] += 1.0;

  // Unit = set of flows that cannot be separated under the split's constraints.
  std::map<std::string, int> unit_of;
  std::vector<std::vector<std::string>> units;
  auto cluster_by = [&](auto key_fn) {
    std::map<std::string, std::vector<std::string>> clusters;
    for (const auto& [name, wf] : kb.workflows()) clusters[key_fn(wf)].push_back(name);
    for (auto& [key, flows] : clusters) {
      for (const auto& f : flows) unit_of[f] = static_cast<int>(units.size());
      units.push_back(flows);
    }
  };

  if (kind == SplitKind::kSplit1) {
    cluster_by([](const WorkflowSpec& wf) { return wf.name; });
  } else if (kind == SplitKind::kSplit2) {
    cluster_by([](const WorkflowSpec& wf) {
      std::string key;
      for (const auto& a : wf.action_sequence) key += a + "|";
      return key;
    });
  } else {
    // Split 3: whole workflow groups, merged transitively when they share an
    // action sequence.
    std::map<std::string, std::set<std::string>> groups_by_seq;
    for (const auto& [name, wf] : kb.workflows()) {
      std::string key;
      for (const auto& a : wf.action_sequence) key += a + "|";
      groups_by_seq[key].insert(wf.group);
    }
    std::map<std::string, std::string> root;
    for (const auto& [name, wf] : kb.workflows()) root.emplace(wf.group, wf.group);
    std::function<std::string(const std::string&)> find = [&](const std::string& g) {
      return root[g] == g ? g : root[g] = find(root[g]);
    };
    for (const auto& [seq, gs] : groups_by_seq) {
      auto it = gs.begin();
      const std::string head = find(*it);
      for (++it; it != gs.end(); ++it) root[find(*it)] = head;
    }
    std::map<std::string, std::vector<std::string>> clusters;
    for (const auto& [name, wf] : kb.workflows()) clusters[find(wf.group)].push_back(name);
    for (auto& [key, flows] : clusters) {
      for (const auto& f : flows) unit_of[f] = static_cast<int>(units.size());
      units.push_back(flows);
    }
  }

  if (units.size() < 2)
    throw_error(Errc::kInfeasibleSplit,
                std::string("cannot form a nonempty train/test ") + split_kind_name(kind) +
                    " assignment for this KB");

  std::map<std::string, double> prefix_train, prefix_test;
  double total_train = 0, total_test = 0;
  for (const auto& unit : units) {
    double train_score = 0, test_score = 0;
    for (const auto& f : unit) {
      const auto key = kb.workflow(f).group + "/" + kb.workflow(f).prefix;
      const double w = weight[f];
      train_score += std::abs((prefix_train[key] + w) - prefix_test[key]);
      test_score += std::abs(prefix_train[key] - (prefix_test[key] + w));
    }
    const bool to_test = test_score < train_score || (test_score == train_score && total_test < total_train);
    for (const auto& f : unit) {
      const auto key = kb.workflow(f).group + "/" + kb.workflow(f).prefix;
      spec.assignment[f] = to_test ? Membership::kTest : Membership::kTrain;
      (to_test ? prefix_test[key] : prefix_train[key]) += weight[f];
      (to_test ? total_test : total_train) += weight[f];
    }
  }
  if (total_train == 0 || total_test == 0)
    throw_error(Errc::kInfeasibleSplit, "generated assignment left one side empty");
  return spec;
}

}  // namespace

SplitSpec make_split(const std::vector<Dialogue>& dataset, const KnowledgeBase& kb,
                     SplitKind kind) {
  for (const Dialogue& d : dataset)
    if (!kb.has_workflow(d.flow))
      throw_error(Errc::kUnknownFlow, "dialogue '" + d.id + "' is labelled with unknown flow '" +
                                          d.flow + "'");

  if (kind == SplitKind::kStandard) {
    SplitSpec spec;
    spec.kind = kind;
    for (const auto& [name, wf] : kb.workflows()) spec.assignment[name] = Membership::kBoth;
    return spec;
  }

  if (kb.workflows() == fixtures::abcd_kb().workflows()) return fixtures::abcd_split(kind);

  SplitSpec spec = generate_split(dataset, kb, kind);
  if (!validate_split(spec, kb).ok())
    throw_error(Errc::kInfeasibleSplit, "generated assignment failed validation");
  return spec;
}

std::string split_to_json(const SplitSpec& spec) {
  ordered_json node;
  node["kind"] = split_kind_name(spec.kind);
  ordered_json assignment = ordered_json::object();
  for (const auto& [flow, m] : spec.assignment) assignment[flow] = membership_name(m);
  node["assignment"] = std::move(assignment);
  return node.dump(2) + "\n";
}

SplitSpec split_from_json(const std::string& text) {
  try {
    const json node = json::parse(text);
    SplitSpec spec;
    spec.kind = split_kind_from_name(node.at("kind").get<std::string>());
    for (const auto& [flow, m] : node.at("assignment").items())
      spec.assignment[flow] = membership_from_name(m.get<std::string>());
    return spec;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw_error(Errc::kMalformedDocument, e.what());
  }
}

std::vector<std::string> observed_sequence_notes(const std::vector<Dialogue>& dataset,
                                                 const SplitSpec& spec, const KnowledgeBase& kb) {
  std::vector<std::string> notes;
  if (spec.kind == SplitKind::kStandard) return notes;

  std::set<std::vector<std::string>> train_kb_sequences;
  for (const auto& [flow, m] : spec.assignment)
    if (m != Membership::kTest && kb.has_workflow(flow))
      train_kb_sequences.insert(kb.workflow(flow).action_sequence);

  std::map<std::string, std::set<Membership>> sides_by_seq;
  std::map<std::string, std::vector<std::string>> ids_by_seq;
  for (const Dialogue& d : dataset) {
    std::vector<std::string> observed;
    std::string key;
    for (const Turn& t : d.turns)
      if (t.is_action()) {
        observed.push_back(t.action->name);
        key += t.action->name + "|";
      }
    if (observed.empty()) continue;
    const Membership m =
        spec.assignment.count(d.flow) ? spec.assignment.at(d.flow) : Membership::kTrain;
    sides_by_seq[key].insert(m);
    ids_by_seq[key].push_back(d.id);
    if (m == Membership::kTest && train_kb_sequences.count(observed))
      notes.push_back("test-side dialogue " + d.id +
                      " executed the prescribed sequence of a training-side flow");
  }
  for (const auto& [seq, sides] : sides_by_seq) {
    const bool spans = sides.count(Membership::kBoth) ||
                       (sides.count(Membership::kTrain) && sides.count(Membership::kTest));
    if (!spans) continue;
    std::string ids;
    for (const auto& id : ids_by_seq[seq]) ids += (ids.empty() ? "" : ", ") + id;
    std::string readable = seq;
    std::replace(readable.begin(), readable.end(), '|', ' ');
    notes.push_back("observed action sequence [" + readable +
                    "] appears on both sides (dialogues: " + ids + ")");
  }
  return notes;
}

}  // namespace flowplan
