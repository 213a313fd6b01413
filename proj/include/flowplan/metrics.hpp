#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowplan/dialogue.hpp"
#include "flowplan/parse.hpp"

namespace flowplan {

struct GoldTarget {
  std::string flow;
  ExpectedKind kind = ExpectedKind::kUtterance;
  std::string action_name;               // kind == kAction
  std::vector<std::string> slot_values;  // kind == kAction
  std::string utterance;                 // kind == kUtterance

  bool operator==(const GoldTarget&) const = default;
};

struct PredictionRecord {
  std::string dialogue_id;
  int turn_index = 0;
  ExpectedKind expected_kind = ExpectedKind::kUtterance;
  GoldTarget gold;
  ParsedPrediction predicted;
  std::string raw_output;

  bool operator==(const PredictionRecord&) const = default;
};

// Empty denominators are reported as not-applicable (nullopt), never 0.
std::optional<double> action_accuracy(const std::vector<PredictionRecord>& records);
std::optional<double> flow_accuracy(const std::vector<PredictionRecord>& records);
std::optional<double> flow_prefix_accuracy(const std::vector<PredictionRecord>& records,
                                           const KnowledgeBase& kb);

// Minimal cost to edit `predicted` into `gold`; additions and substitutions
// cost 1, deletions cost 1 or 0 (free_deletion).
int levenshtein_actions(const std::vector<std::string>& predicted,
                        const std::vector<std::string>& gold, bool free_deletion);

struct SlotOrderedAccuracy {
  std::optional<double> mean;  // average per-turn fraction of positions correct
  std::optional<double> all;   // fraction of turns fully correct
};
SlotOrderedAccuracy slot_accuracy_ordered(const std::vector<PredictionRecord>& records);

enum class SlotDenominator { kExpected, kPredicted, kLongest };
std::optional<double> slot_set_metric(const std::vector<PredictionRecord>& records,
                                      SlotDenominator denominator, bool include_empty);

struct ConfusionMatrix {
  std::vector<std::string> row_labels;  // gold vocabulary
  std::vector<std::string> col_labels;  // row_labels + "<blank>" + "<other>"
  std::vector<std::vector<int>> counts;
  int total = 0;

  int at(const std::string& row, const std::string& col) const;
  int row_sum(const std::string& row) const;
  long trace() const;
  bool is_diagonal() const;
};

ConfusionMatrix action_confusion(const std::vector<PredictionRecord>& records,
                                 const KnowledgeBase& kb);
ConfusionMatrix flow_confusion(const std::vector<PredictionRecord>& records,
                               const KnowledgeBase& kb);

struct PerTurnPoint {
  int ordinal = 0;  // position among the dialogue's prediction turns
  int count = 0;
  double flow_accuracy = 0.0;
  double prefix_accuracy = 0.0;
};
std::vector<PerTurnPoint> per_turn_flow_accuracy(const std::vector<PredictionRecord>& records,
                                                 const KnowledgeBase& kb);

struct FlowSourceBreakdown {
  int train_count = 0, test_only_count = 0, neither_count = 0;
  double train_pct = 0.0, test_only_pct = 0.0, neither_pct = 0.0;
};
FlowSourceBreakdown flow_source_breakdown(const std::vector<PredictionRecord>& records,
                                          const SplitSpec& split);

struct ExposureBucket {
  int count = 0;
  std::optional<double> accuracy;
};

struct ExposureBreakdown {
  ExposureBucket theoretical_seen, theoretical_unseen;
  ExposureBucket actual_seen, actual_unseen;
  std::set<std::string> theoretically_seen_actions;
  std::set<std::string> actually_seen_actions;
};

// theoretical: the action appears in some training-side workflow's prescribed
// sequence; actual: it occurs in >=1 training example's gold action turns.
ExposureBreakdown action_exposure_breakdown(const std::vector<PredictionRecord>& records,
                                            const SplitSpec& split, const KnowledgeBase& kb,
                                            const std::vector<Dialogue>& training_data);

struct MetricsReport {
  int num_records = 0;
  int num_action_records = 0;
  int num_dialogues = 0;

  std::optional<double> action_acc;
  std::optional<double> flow_acc;
  std::optional<double> flow_prefix_acc;

  std::optional<double> lev_act;
  std::optional<double> lev_act_free_del;
  int lev_dialogues = 0;
  int lev_excluded_no_gold_actions = 0;

  std::optional<double> slot_mean;
  std::optional<double> slot_all;

  std::optional<double> slot_set_expected;
  std::optional<double> slot_set_expected_with_empty;
  std::optional<double> slot_set_predicted;
  std::optional<double> slot_set_longest;
  std::optional<double> slot_set_longest_with_empty;

  ConfusionMatrix action_matrix;
  ConfusionMatrix flow_matrix;
  std::vector<PerTurnPoint> per_turn;

  std::optional<FlowSourceBreakdown> flow_source;
  std::optional<ExposureBreakdown> exposure;
};

std::string report_to_json(const MetricsReport& report);

// metrics.csv, action_confusion.csv, flow_confusion.csv, per_turn.csv
void write_report_csv(const MetricsReport& report, const std::string& directory);

}  // namespace flowplan
