#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowplan/kb.hpp"

namespace flowplan {

enum class Speaker { kAgent, kCustomer, kAction };

struct ActionCall {
  std::string name;
  std::vector<std::string> values;

  bool operator==(const ActionCall&) const = default;
};

// Exactly one of utterance/action is set, enforced by the factories.
struct Turn {
  Speaker speaker = Speaker::kAgent;
  std::optional<std::string> utterance;
  std::optional<ActionCall> action;

  static Turn agent(std::string text);
  static Turn customer(std::string text);
  static Turn act(std::string name, std::vector<std::string> values);

  bool is_action() const { return speaker == Speaker::kAction; }
  bool operator==(const Turn&) const = default;
};

struct Dialogue {
  std::string id;
  std::string flow;  // gold label
  std::vector<Turn> turns;

  bool operator==(const Dialogue&) const = default;
};

// `agent: <utterance>` / `customer: <utterance>` / `action: <name>: <v1>, <v2>`
std::string serialize_turn(const Turn& t);

// Space-joined serialize_turn over turns[0, upto).
std::string serialize_history(const Dialogue& d, std::size_t upto);

// Dataset file format: JSON lines, one dialogue per line.
std::string dialogue_to_json(const Dialogue& d);
Dialogue dialogue_from_json(const std::string& line);
std::vector<Dialogue> load_dialogues_jsonl(const std::string& text);
std::string dialogues_to_jsonl(const std::vector<Dialogue>& dialogues);

enum class SplitKind { kStandard, kSplit1, kSplit2, kSplit3 };
enum class Membership { kTrain, kTest, kBoth };

const char* split_kind_name(SplitKind kind);
SplitKind split_kind_from_name(const std::string& name);

struct SplitSpec {
  SplitKind kind = SplitKind::kStandard;
  std::map<std::string, Membership> assignment;

  Membership membership(const std::string& flow) const;  // kUnknownFlow
  std::vector<std::string> train_flows() const;          // membership train or both
  std::vector<std::string> test_flows() const;           // membership test or both
  std::vector<std::string> test_only_flows() const;

  bool operator==(const SplitSpec&) const = default;
};

struct SplitViolation {
  enum class Type { kFlowOverlap, kSequenceOverlap, kPrefixOverlap };
  Type type;
  std::string test_flow;
  std::string train_flow;
  std::string detail;
};

struct SplitReport {
  std::vector<SplitViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Returns the canonical embedded assignment when the KB's workflow table matches
// the embedded one; otherwise a greedy constraint-satisfying assignment balanced
// per prefix group (weighted by dialogue counts when a dataset is supplied).
SplitSpec make_split(const std::vector<Dialogue>& dataset, const KnowledgeBase& kb, SplitKind kind);

SplitReport validate_split(const SplitSpec& spec, const KnowledgeBase& kb);

std::string split_to_json(const SplitSpec& spec);
SplitSpec split_from_json(const std::string& text);

// Report-only diagnostic: dialogues whose observed gold action sequence exists
// verbatim on the other side of the split (the split constraints themselves
// bind on KB sequences, not observed ones).
std::vector<std::string> observed_sequence_notes(const std::vector<Dialogue>& dataset,
                                                 const SplitSpec& spec, const KnowledgeBase& kb);

}  // namespace flowplan
