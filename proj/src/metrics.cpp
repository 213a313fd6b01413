#include "flowplan/metrics.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "json.hpp"

namespace flowplan {

using nlohmann::ordered_json;

namespace {

std::optional<double> ratio(long hits, long total) {
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

bool predicted_action_matches(const PredictionRecord& r) {
  return r.predicted.kind == PredictionKind::kAction && r.predicted.action_name.has_value() &&
         *r.predicted.action_name == r.gold.action_name;
}

std::vector<std::string> predicted_slots(const PredictionRecord& r) {
  if (r.predicted.kind != PredictionKind::kAction) return {};
  return r.predicted.slot_values;
}

}  // namespace

std::optional<double> action_accuracy(const std::vector<PredictionRecord>& records) {
  long hits = 0, total = 0;
  for (const auto& r : records) {
    if (r.expected_kind != ExpectedKind::kAction) continue;
    ++total;
    if (predicted_action_matches(r)) ++hits;
  }
  return ratio(hits, total);
}

std::optional<double> flow_accuracy(const std::vector<PredictionRecord>& records) {
  long hits = 0, total = 0;
  for (const auto& r : records) {
    ++total;
    if (r.predicted.flow && *r.predicted.flow == r.gold.flow) ++hits;
  }
  return ratio(hits, total);
}

std::optional<double> flow_prefix_accuracy(const std::vector<PredictionRecord>& records,
                                           const KnowledgeBase& kb) {
  long hits = 0, total = 0;
  for (const auto& r : records) {
    ++total;
    if (r.predicted.flow && prefix_of(kb, *r.predicted.flow) == prefix_of(kb, r.gold.flow)) ++hits;
  }
  return ratio(hits, total);
}

int levenshtein_actions(const std::vector<std::string>& predicted,
                        const std::vector<std::string>& gold, bool free_deletion) {
  const int del_cost = free_deletion ? 0 : 1;
  const size_t m = predicted.size(), n = gold.size();
  std::vector<int> prev(n + 1), row(n + 1);
  for (size_t j = 0; j <= n; ++j) prev[j] = static_cast<int>(j);  // additions
  for (size_t i = 1; i <= m; ++i) {
    row[0] = static_cast<int>(i) * del_cost;
    for (size_t j = 1; j <= n; ++j) {
      const int sub = prev[j - 1] + (predicted[i - 1] == gold[j - 1] ? 0 : 1);
      row[j] = std::min({prev[j] + del_cost, row[j - 1] + 1, sub});
    }
    std::swap(prev, row);
  }
  return prev[n];
}

SlotOrderedAccuracy slot_accuracy_ordered(const std::vector<PredictionRecord>& records) {
  double mean_sum = 0;
  long all_hits = 0, total = 0;
  for (const auto& r : records) {
    if (r.expected_kind != ExpectedKind::kAction) continue;
    ++total;
    const auto& gold = r.gold.slot_values;
    const auto pred = predicted_slots(r);
    if (gold.empty()) {  // zero-slot action, vacuously correct
      mean_sum += 1.0;
      ++all_hits;
      continue;
    }
    size_t matches = 0;
    for (size_t i = 0; i < gold.size(); ++i)
      if (i < pred.size() && pred[i] == gold[i]) ++matches;
    mean_sum += static_cast<double>(matches) / static_cast<double>(gold.size());
    if (matches == gold.size()) ++all_hits;
  }
  SlotOrderedAccuracy out;
  if (total > 0) {
    out.mean = mean_sum / static_cast<double>(total);
    out.all = static_cast<double>(all_hits) / static_cast<double>(total);
  }
  return out;
}

namespace {

size_t multiset_intersection_size(std::vector<std::string> a, std::vector<std::string> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0, hits = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++hits;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return hits;
}

}  // namespace

std::optional<double> slot_set_metric(const std::vector<PredictionRecord>& records,
                                      SlotDenominator denominator, bool include_empty) {
  double sum = 0;
  long total = 0;
  for (const auto& r : records) {
    if (r.expected_kind != ExpectedKind::kAction) continue;
    const auto& gold = r.gold.slot_values;
    const auto pred = predicted_slots(r);
    if (gold.empty()) {
      if (!include_empty) continue;
      if (pred.empty()) {
        sum += 1.0;
        ++total;
        continue;
      }
    }
    size_t denom = 0;
    switch (denominator) {
      case SlotDenominator::kExpected: denom = gold.size(); break;
      case SlotDenominator::kPredicted: denom = pred.size(); break;
      case SlotDenominator::kLongest: denom = std::max(gold.size(), pred.size()); break;
    }
    if (denom == 0) continue;  // division undefined: excluded, not scored
    sum += static_cast<double>(multiset_intersection_size(pred, gold)) /
           static_cast<double>(denom);
    ++total;
  }
  if (total == 0) return std::nullopt;
  return sum / static_cast<double>(total);
}

int ConfusionMatrix::at(const std::string& row, const std::string& col) const {
  const auto r = std::find(row_labels.begin(), row_labels.end(), row);
  const auto c = std::find(col_labels.begin(), col_labels.end(), col);
  if (r == row_labels.end() || c == col_labels.end()) return 0;
  return counts[static_cast<size_t>(r - row_labels.begin())]
               [static_cast<size_t>(c - col_labels.begin())];
}

int ConfusionMatrix::row_sum(const std::string& row) const {
  const auto r = std::find(row_labels.begin(), row_labels.end(), row);
  if (r == row_labels.end()) return 0;
  int sum = 0;
  for (int v : counts[static_cast<size_t>(r - row_labels.begin())]) sum += v;
  return sum;
}

long ConfusionMatrix::trace() const {
  long sum = 0;
  for (size_t i = 0; i < row_labels.size(); ++i) sum += counts[i][i];
  return sum;
}

bool ConfusionMatrix::is_diagonal() const {
  for (size_t i = 0; i < counts.size(); ++i)
    for (size_t j = 0; j < counts[i].size(); ++j)
      if (i != j && counts[i][j] != 0) return false;
  return true;
}

namespace {

ConfusionMatrix build_confusion(const std::vector<std::string>& vocabulary,
                                const std::vector<std::pair<std::string, std::string>>& pairs) {
  ConfusionMatrix m;
  std::set<std::string> labels(vocabulary.begin(), vocabulary.end());
  for (const auto& [gold, pred] : pairs) labels.insert(gold);
  m.row_labels.assign(labels.begin(), labels.end());
  m.col_labels = m.row_labels;
  m.col_labels.push_back("<blank>");
  m.col_labels.push_back("<other>");
  std::map<std::string, size_t> row_index, col_index;
  for (size_t i = 0; i < m.row_labels.size(); ++i) row_index[m.row_labels[i]] = i;
  for (size_t i = 0; i < m.col_labels.size(); ++i) col_index[m.col_labels[i]] = i;
  m.counts.assign(m.row_labels.size(), std::vector<int>(m.col_labels.size(), 0));
  for (const auto& [gold, pred] : pairs) {
    size_t col;
    if (pred == "<blank>")
      col = col_index.at("<blank>");
    else if (col_index.count(pred))
      col = col_index.at(pred);
    else
      col = col_index.at("<other>");
    ++m.counts[row_index.at(gold)][col];
    ++m.total;
  }
  return m;
}

}  // namespace

ConfusionMatrix action_confusion(const std::vector<PredictionRecord>& records,
                                 const KnowledgeBase& kb) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& r : records) {
    if (r.expected_kind != ExpectedKind::kAction) continue;
    std::string pred = "<blank>";  // utterance-on-action and malformed outputs
    if (r.predicted.kind == PredictionKind::kAction && r.predicted.action_name)
      pred = *r.predicted.action_name;
    pairs.emplace_back(r.gold.action_name, pred);
  }
  return build_confusion(kb.action_names(), pairs);
}

ConfusionMatrix flow_confusion(const std::vector<PredictionRecord>& records,
                               const KnowledgeBase& kb) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& r : records) {
    std::string pred = r.predicted.flow ? *r.predicted.flow : "<blank>";
    if (pred.empty()) pred = "<blank>";
    pairs.emplace_back(r.gold.flow, pred);
  }
  return build_confusion(kb.workflow_names(), pairs);
}

std::vector<PerTurnPoint> per_turn_flow_accuracy(const std::vector<PredictionRecord>& records,
                                                 const KnowledgeBase& kb) {
  std::map<std::string, std::vector<const PredictionRecord*>> by_dialogue;
  for (const auto& r : records) by_dialogue[r.dialogue_id].push_back(&r);

  std::vector<int> counts;
  std::vector<long> flow_hits, prefix_hits;
  for (auto& [id, turns] : by_dialogue) {
    std::sort(turns.begin(), turns.end(),
              [](const PredictionRecord* a, const PredictionRecord* b) {
                return a->turn_index < b->turn_index;
              });
    for (size_t ordinal = 0; ordinal < turns.size(); ++ordinal) {
      if (counts.size() <= ordinal) {
        counts.push_back(0);
        flow_hits.push_back(0);
        prefix_hits.push_back(0);
      }
      const PredictionRecord& r = *turns[ordinal];
      ++counts[ordinal];
      if (r.predicted.flow && *r.predicted.flow == r.gold.flow) ++flow_hits[ordinal];
      if (r.predicted.flow &&
          prefix_of(kb, *r.predicted.flow) == prefix_of(kb, r.gold.flow))
        ++prefix_hits[ordinal];
    }
  }
  std::vector<PerTurnPoint> series;
  for (size_t i = 0; i < counts.size(); ++i) {
    PerTurnPoint point;
    point.ordinal = static_cast<int>(i);
    point.count = counts[i];
    point.flow_accuracy = static_cast<double>(flow_hits[i]) / counts[i];
    point.prefix_accuracy = static_cast<double>(prefix_hits[i]) / counts[i];
    series.push_back(point);
  }
  return series;
}

FlowSourceBreakdown flow_source_breakdown(const std::vector<PredictionRecord>& records,
                                          const SplitSpec& split) {
  FlowSourceBreakdown out;
  for (const auto& r : records) {
    if (!r.predicted.flow) continue;
    auto it = split.assignment.find(*r.predicted.flow);
    if (it == split.assignment.end())
      ++out.neither_count;
    else if (it->second == Membership::kTest)
      ++out.test_only_count;
    else
      ++out.train_count;
  }
  const int total = out.train_count + out.test_only_count + out.neither_count;
  if (total > 0) {
    out.train_pct = 100.0 * out.train_count / total;
    out.test_only_pct = 100.0 * out.test_only_count / total;
    out.neither_pct = 100.0 * out.neither_count / total;
  }
  return out;
}

ExposureBreakdown action_exposure_breakdown(const std::vector<PredictionRecord>& records,
                                            const SplitSpec& split, const KnowledgeBase& kb,
                                            const std::vector<Dialogue>& training_data) {
  ExposureBreakdown out;
  for (const auto& [flow, m] : split.assignment) {
    if (m == Membership::kTest) continue;
    if (!kb.has_workflow(flow)) continue;
    const auto& seq = kb.workflow(flow).action_sequence;
    out.theoretically_seen_actions.insert(seq.begin(), seq.end());
  }
  for (const Dialogue& d : training_data)
    for (const Turn& t : d.turns)
      if (t.is_action()) out.actually_seen_actions.insert(t.action->name);

  long theo_seen_hits = 0, theo_unseen_hits = 0, act_seen_hits = 0, act_unseen_hits = 0;
  for (const auto& r : records) {
    if (r.expected_kind != ExpectedKind::kAction) continue;
    const bool hit = predicted_action_matches(r);
    if (out.theoretically_seen_actions.count(r.gold.action_name)) {
      ++out.theoretical_seen.count;
      theo_seen_hits += hit;
    } else {
      ++out.theoretical_unseen.count;
      theo_unseen_hits += hit;
    }
    if (out.actually_seen_actions.count(r.gold.action_name)) {
      ++out.actual_seen.count;
      act_seen_hits += hit;
    } else {
      ++out.actual_unseen.count;
      act_unseen_hits += hit;
    }
  }
  out.theoretical_seen.accuracy = ratio(theo_seen_hits, out.theoretical_seen.count);
  out.theoretical_unseen.accuracy = ratio(theo_unseen_hits, out.theoretical_unseen.count);
  out.actual_seen.accuracy = ratio(act_seen_hits, out.actual_seen.count);
  out.actual_unseen.accuracy = ratio(act_unseen_hits, out.actual_unseen.count);
  return out;
}

namespace {

ordered_json opt_json(const std::optional<double>& value) {
  if (!value) return "not_applicable";
  return *value;
}

ordered_json matrix_json(const ConfusionMatrix& m) {
  ordered_json node;
  node["rows"] = m.row_labels;
  node["columns"] = m.col_labels;
  node["counts"] = m.counts;
  node["total"] = m.total;
  return node;
}

}  // namespace

std::string report_to_json(const MetricsReport& report) {
  ordered_json node;
  node["num_records"] = report.num_records;
  node["num_action_records"] = report.num_action_records;
  node["num_dialogues"] = report.num_dialogues;
  node["action_accuracy"] = opt_json(report.action_acc);
  node["flow_accuracy"] = opt_json(report.flow_acc);
  node["flow_prefix_accuracy"] = opt_json(report.flow_prefix_acc);
  node["lev_act"] = opt_json(report.lev_act);
  node["lev_act_free_del"] = opt_json(report.lev_act_free_del);
  node["lev_dialogues"] = report.lev_dialogues;
  node["lev_excluded_no_gold_actions"] = report.lev_excluded_no_gold_actions;
  node["slot_mean"] = opt_json(report.slot_mean);
  node["slot_all"] = opt_json(report.slot_all);
  node["slot_set"] = {
      {"expected", opt_json(report.slot_set_expected)},
      {"expected_with_empty", opt_json(report.slot_set_expected_with_empty)},
      {"predicted", opt_json(report.slot_set_predicted)},
      {"longest", opt_json(report.slot_set_longest)},
      {"longest_with_empty", opt_json(report.slot_set_longest_with_empty)},
  };
  ordered_json per_turn = ordered_json::array();
  for (const auto& point : report.per_turn) {
    per_turn.push_back({{"ordinal", point.ordinal},
                        {"count", point.count},
                        {"flow_accuracy", point.flow_accuracy},
                        {"prefix_accuracy", point.prefix_accuracy}});
  }
  node["per_turn_flow_accuracy"] = std::move(per_turn);
  if (report.flow_source) {
    node["flow_source"] = {{"train_pct", report.flow_source->train_pct},
                           {"test_only_pct", report.flow_source->test_only_pct},
                           {"neither_pct", report.flow_source->neither_pct},
                           {"train_count", report.flow_source->train_count},
                           {"test_only_count", report.flow_source->test_only_count},
                           {"neither_count", report.flow_source->neither_count}};
  }
  if (report.exposure) {
    auto bucket = [](const ExposureBucket& b) {
      return ordered_json{{"count", b.count}, {"accuracy", opt_json(b.accuracy)}};
    };
    node["action_exposure"] = {
        {"theoretical_seen", bucket(report.exposure->theoretical_seen)},
        {"theoretical_unseen", bucket(report.exposure->theoretical_unseen)},
        {"actual_seen", bucket(report.exposure->actual_seen)},
        {"actual_unseen", bucket(report.exposure->actual_unseen)},
    };
  }
  node["action_confusion"] = matrix_json(report.action_matrix);
  node["flow_confusion"] = matrix_json(report.flow_matrix);
  return node.dump(2) + "\n";
}

namespace {

void write_matrix_csv(const ConfusionMatrix& m, const std::string& path) {
  std::ofstream out(path);
  out << "gold";
  for (const auto& col : m.col_labels) out << "," << col;
  out << "\n";
  for (size_t i = 0; i < m.row_labels.size(); ++i) {
    out << m.row_labels[i];
    for (int v : m.counts[i]) out << "," << v;
    out << "\n";
  }
}

std::string opt_csv(const std::optional<double>& value) {
  return value ? std::to_string(*value) : "not_applicable";
}

}  // namespace

void write_report_csv(const MetricsReport& report, const std::string& directory) {
  std::filesystem::create_directories(directory);
  {
    std::ofstream out(directory + "/metrics.csv");
    out << "metric,value\n";
    out << "action_accuracy," << opt_csv(report.action_acc) << "\n";
    out << "flow_accuracy," << opt_csv(report.flow_acc) << "\n";
    out << "flow_prefix_accuracy," << opt_csv(report.flow_prefix_acc) << "\n";
    out << "lev_act," << opt_csv(report.lev_act) << "\n";
    out << "lev_act_free_del," << opt_csv(report.lev_act_free_del) << "\n";
    out << "slot_mean," << opt_csv(report.slot_mean) << "\n";
    out << "slot_all," << opt_csv(report.slot_all) << "\n";
    out << "slot_set_expected," << opt_csv(report.slot_set_expected) << "\n";
    out << "slot_set_expected_with_empty," << opt_csv(report.slot_set_expected_with_empty) << "\n";
    out << "slot_set_predicted," << opt_csv(report.slot_set_predicted) << "\n";
    out << "slot_set_longest," << opt_csv(report.slot_set_longest) << "\n";
    out << "slot_set_longest_with_empty," << opt_csv(report.slot_set_longest_with_empty) << "\n";
  }
  write_matrix_csv(report.action_matrix, directory + "/action_confusion.csv");
  write_matrix_csv(report.flow_matrix, directory + "/flow_confusion.csv");
  {
    std::ofstream out(directory + "/per_turn.csv");
    out << "ordinal,count,flow_accuracy,prefix_accuracy\n";
    for (const auto& point : report.per_turn)
      out << point.ordinal << "," << point.count << "," << point.flow_accuracy << ","
          << point.prefix_accuracy << "\n";
  }
}

}  // namespace flowplan
