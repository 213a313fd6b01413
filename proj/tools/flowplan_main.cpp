#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "flowplan/fixtures.hpp"
#include "flowplan/harness.hpp"

using namespace flowplan;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(Errc::kInvalidArgument, "cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_error(Errc::kInvalidArgument, "cannot write '" + path + "'");
  out << content;
}

KnowledgeBase load_kb_or_default(const std::string& path) {
  if (path.empty()) return fixtures::abcd_kb();
  return load_kb(read_file(path));
}

std::vector<std::string> split_csv_arg(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto begin = item.find_first_not_of(' ');
    if (begin == std::string::npos) continue;
    const auto end = item.find_last_not_of(' ');
    out.push_back(item.substr(begin, end - begin + 1));
  }
  return out;
}

struct PlanArgs {
  std::string flow, slots, executed, emit_dir, kb_path;
  bool replan = false;
  bool include_slots = false;
  std::size_t node_cap = 1'000'000;
};

int run_plan(const PlanArgs& args) {
  const KnowledgeBase kb = load_kb_or_default(args.kb_path);
  const auto executed = split_csv_arg(args.executed);

  if (args.replan || !executed.empty()) {
    const PlanMode mode = args.replan ? PlanMode::kReplan : PlanMode::kLookup;
    const ActionPlan plan = remaining_plan(kb, args.flow, executed, mode, args.include_slots);
    std::cout << "action_plan: ";
    const auto tokens = args.include_slots ? plan.tokens() : plan.actions();
    for (size_t i = 0; i < tokens.size(); ++i) std::cout << (i ? ", " : "") << tokens[i];
    std::cout << ";\n";
    return 0;
  }

  const PlanningProblem problem = ground_problem(kb, args.flow, split_csv_arg(args.slots));
  if (!args.emit_dir.empty()) {
    const PddlText pddl = emit_pddl(problem);
    write_file(args.emit_dir + "/domain.pddl", pddl.domain_text);
    write_file(args.emit_dir + "/problem.pddl", pddl.problem_text);
    std::cout << "wrote " << args.emit_dir << "/domain.pddl and problem.pddl\n";
  }
  const auto plan = solve(problem, {args.node_cap});
  if (!plan) {
    std::cout << "UNSOLVABLE\n";
    return 1;
  }
  for (const auto& step : plan->steps) std::cout << step << "\n";
  const ActionPlan stripped = strip_plan(*plan, args.include_slots);
  std::cout << "action_plan: ";
  const auto tokens = args.include_slots ? stripped.tokens() : stripped.actions();
  for (size_t i = 0; i < tokens.size(); ++i) std::cout << (i ? ", " : "") << tokens[i];
  std::cout << ";\n";
  return 0;
}

struct SplitArgs {
  std::string kind = "split3";
  std::string out, kb_path, data_path;
  bool check_observed = false;
};

int run_split(const SplitArgs& args) {
  const KnowledgeBase kb = load_kb_or_default(args.kb_path);
  std::vector<Dialogue> dataset;
  if (!args.data_path.empty()) dataset = load_dialogues_jsonl(read_file(args.data_path));

  const SplitSpec spec = make_split(dataset, kb, split_kind_from_name(args.kind));
  const SplitReport report = validate_split(spec, kb);
  std::cout << "split " << args.kind << ": " << spec.train_flows().size() << " train flows, "
            << spec.test_only_flows().size() << " test flows, " << report.violations.size()
            << " violations\n";
  for (const auto& v : report.violations) std::cout << "violation: " << v.detail << "\n";

  if (args.check_observed && !dataset.empty()) {
    for (const auto& note : observed_sequence_notes(dataset, spec, kb))
      std::cout << "note: " << note << "\n";
  }
  if (!args.out.empty()) {
    write_file(args.out, split_to_json(spec));
    std::cout << "wrote " << args.out << "\n";
  }
  return report.ok() ? 0 : 2;
}

struct ContextArgs {
  std::string config = "LFP";
  std::string split_path, data_path, out, kb_path;
  std::string plan_mode = "lookup";
};

RunConfig make_run_config(const std::string& config, const std::string& split_path,
                          const KnowledgeBase& kb, const std::string& plan_mode,
                          int concurrency) {
  const SplitSpec split = split_path.empty()
                              ? make_split({}, kb, SplitKind::kStandard)
                              : split_from_json(read_file(split_path));
  const PlanMode mode = plan_mode == "replan" ? PlanMode::kReplan : PlanMode::kLookup;
  return RunConfig::make(PromptConfig::from_string(config), split, kb, mode, concurrency);
}

int run_build_contexts(const ContextArgs& args) {
  const KnowledgeBase kb = load_kb_or_default(args.kb_path);
  const auto dataset = load_dialogues_jsonl(read_file(args.data_path));
  const RunConfig cfg = make_run_config(args.config, args.split_path, kb, args.plan_mode, 1);
  const auto records = build_context_records(dataset, cfg, kb);
  write_file(args.out, context_records_to_jsonl(records));
  std::cout << "wrote " << records.size() << " context records to " << args.out << "\n";
  return 0;
}

struct PredictArgs {
  std::string agent = "oracle";
  std::string endpoint, config = "LFP";
  std::string split_path, data_path, out, kb_path;
  std::string plan_mode = "lookup";
  int concurrency = 1;
};

int run_predict(const PredictArgs& args) {
  const KnowledgeBase kb = load_kb_or_default(args.kb_path);
  const auto dataset = load_dialogues_jsonl(read_file(args.data_path));
  const RunConfig cfg =
      make_run_config(args.config, args.split_path, kb, args.plan_mode, args.concurrency);

  AgentClient client;
  client.kind = agent_kind_from_name(args.agent);
  client.endpoint = args.endpoint;
  if (const char* endpoint = std::getenv("FLOWPLAN_ENDPOINT"); endpoint && *endpoint)
    client.endpoint = endpoint;

  const auto records = predict_dataset(client, dataset, cfg, kb);
  write_file(args.out, records_to_jsonl(records, cfg.prompt));
  std::cout << "wrote " << records.size() << " prediction records to " << args.out << "\n";
  return 0;
}

struct ScoreArgs {
  std::vector<std::string> preds;
  std::string split_path, out, kb_path, train_data_path, csv_dir;
};

int run_score(const ScoreArgs& args) {
  const KnowledgeBase kb = load_kb_or_default(args.kb_path);
  const SplitSpec split = args.split_path.empty() ? make_split({}, kb, SplitKind::kStandard)
                                                  : split_from_json(read_file(args.split_path));
  std::vector<Dialogue> training;
  if (!args.train_data_path.empty())
    training = load_dialogues_jsonl(read_file(args.train_data_path));

  std::vector<PredictionRecord> all_records;
  std::vector<MetricsReport> per_file;
  for (const auto& path : args.preds) {
    PromptConfig cfg;
    auto records = records_from_jsonl(read_file(path), &cfg);
    per_file.push_back(score_run(records, split, kb, training, !args.train_data_path.empty()));
    all_records.insert(all_records.end(), records.begin(), records.end());
  }

  MetricsReport report =
      score_run(all_records, split, kb, training, !args.train_data_path.empty());
  if (per_file.size() > 1) {
    // Seed-style aggregation: scalar metrics become unweighted means over files.
    auto macro = [&](std::optional<double> MetricsReport::* field) {
      double sum = 0;
      int n = 0;
      for (const auto& r : per_file)
        if (r.*field) {
          sum += *(r.*field);
          ++n;
        }
      return n ? std::optional<double>(sum / n) : std::nullopt;
    };
    report.action_acc = macro(&MetricsReport::action_acc);
    report.flow_acc = macro(&MetricsReport::flow_acc);
    report.flow_prefix_acc = macro(&MetricsReport::flow_prefix_acc);
    report.lev_act = macro(&MetricsReport::lev_act);
    report.lev_act_free_del = macro(&MetricsReport::lev_act_free_del);
    report.slot_mean = macro(&MetricsReport::slot_mean);
    report.slot_all = macro(&MetricsReport::slot_all);
    report.slot_set_expected = macro(&MetricsReport::slot_set_expected);
    report.slot_set_expected_with_empty = macro(&MetricsReport::slot_set_expected_with_empty);
    report.slot_set_predicted = macro(&MetricsReport::slot_set_predicted);
    report.slot_set_longest = macro(&MetricsReport::slot_set_longest);
    report.slot_set_longest_with_empty = macro(&MetricsReport::slot_set_longest_with_empty);
  }

  const std::string json = report_to_json(report);
  if (args.out.empty())
    std::cout << json;
  else
    write_file(args.out, json);
  if (!args.csv_dir.empty()) write_report_csv(report, args.csv_dir);
  if (!args.out.empty()) std::cout << "wrote " << args.out << "\n";
  return 0;
}

struct DatasetArgs {
  std::string out, kb_path;
  int per_flow = 1;
  bool include_samples = false;
};

int run_dataset(const DatasetArgs& args) {
  const KnowledgeBase kb = load_kb_or_default(args.kb_path);
  auto dataset = fixtures::synthetic_dataset(kb, args.per_flow);
  if (args.include_samples && kb.has_workflow("recover_password")) {
    dataset.push_back(fixtures::sample_recover_password_dialogue());
    dataset.push_back(fixtures::sample_mislabeled_reset_2fa_dialogue());
  }
  write_file(args.out, dialogues_to_jsonl(dataset));
  std::cout << "wrote " << dataset.size() << " dialogues to " << args.out << "\n";
  return 0;
}

struct KbArgs {
  std::string out, kb_path;
  bool extra_verification = false;
};

int run_kb(const KbArgs& args) {
  KnowledgeBase kb = load_kb_or_default(args.kb_path);
  if (args.extra_verification) {
    auto [perturbed, changed] = apply_perturbation(kb, fixtures::extra_verification_perturbation());
    std::cout << "perturbation changed " << changed.size() << " workflows\n";
    kb = std::move(perturbed);
  }
  if (args.out.empty())
    std::cout << serialize_kb(kb);
  else {
    write_file(args.out, serialize_kb(kb));
    std::cout << "wrote " << args.out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workflow planning and dialogue-evaluation toolkit"};
  app.require_subcommand(1);

  PlanArgs plan_args;
  auto* plan_cmd = app.add_subcommand("plan", "ground a workflow and print its plan");
  plan_cmd->add_option("--flow", plan_args.flow, "workflow name")->required();
  plan_cmd->add_option("--slots", plan_args.slots, "comma-separated slots already known");
  plan_cmd->add_option("--executed", plan_args.executed, "comma-separated actions already done");
  plan_cmd->add_flag("--replan", plan_args.replan, "recompute the remainder with the solver");
  plan_cmd->add_flag("--include-slots", plan_args.include_slots, "keep slot steps in the plan");
  plan_cmd->add_option("--emit-pddl", plan_args.emit_dir, "write domain/problem files here");
  plan_cmd->add_option("--kb", plan_args.kb_path, "KB json (default: embedded)");
  plan_cmd->add_option("--node-cap", plan_args.node_cap, "search node budget");

  SplitArgs split_args;
  auto* split_cmd = app.add_subcommand("split", "build and validate a train/test split");
  split_cmd->add_option("--kind", split_args.kind, "standard|split1|split2|split3");
  split_cmd->add_option("--out", split_args.out, "assignment json path");
  split_cmd->add_option("--kb", split_args.kb_path, "KB json (default: embedded)");
  split_cmd->add_option("--data", split_args.data_path, "dialogue jsonl");
  split_cmd->add_flag("--check-observed", split_args.check_observed,
                      "report observed action sequences that cross the split");

  ContextArgs ctx_args;
  auto* ctx_cmd = app.add_subcommand("build-contexts", "emit context/target pairs");
  ctx_cmd->add_option("--config", ctx_args.config, "augmentations, e.g. LFP");
  ctx_cmd->add_option("--split", ctx_args.split_path, "assignment json");
  ctx_cmd->add_option("--data", ctx_args.data_path, "dialogue jsonl")->required();
  ctx_cmd->add_option("--out", ctx_args.out, "output jsonl")->required();
  ctx_cmd->add_option("--kb", ctx_args.kb_path, "KB json (default: embedded)");
  ctx_cmd->add_option("--plan-mode", ctx_args.plan_mode, "lookup|replan");

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "teacher-forced prediction over a dataset");
  predict_cmd->add_option("--agent", predict_args.agent, "remote|oracle|plan-follower");
  predict_cmd->add_option("--endpoint", predict_args.endpoint,
                          "http endpoint (FLOWPLAN_ENDPOINT overrides)");
  predict_cmd->add_option("--config", predict_args.config, "augmentations, e.g. LFP");
  predict_cmd->add_option("--split", predict_args.split_path, "assignment json");
  predict_cmd->add_option("--data", predict_args.data_path, "dialogue jsonl")->required();
  predict_cmd->add_option("--out", predict_args.out, "prediction jsonl")->required();
  predict_cmd->add_option("--kb", predict_args.kb_path, "KB json (default: embedded)");
  predict_cmd->add_option("--plan-mode", predict_args.plan_mode, "lookup|replan");
  predict_cmd->add_option("--concurrency", predict_args.concurrency, "dialogue-level parallelism");

  ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand("score", "score prediction files");
  score_cmd->add_option("--preds", score_args.preds, "prediction jsonl (repeat for seed averaging)")
      ->required();
  score_cmd->add_option("--split", score_args.split_path, "assignment json");
  score_cmd->add_option("--out", score_args.out, "report json path (default: stdout)");
  score_cmd->add_option("--kb", score_args.kb_path, "KB json (default: embedded)");
  score_cmd->add_option("--train-data", score_args.train_data_path,
                        "training dialogues for the exposure table");
  score_cmd->add_option("--csv-dir", score_args.csv_dir, "also write csv tables here");

  DatasetArgs dataset_args;
  auto* dataset_cmd = app.add_subcommand("dataset", "write the bundled demo dialogues");
  dataset_cmd->add_option("--out", dataset_args.out, "dialogue jsonl path")->required();
  dataset_cmd->add_option("--per-flow", dataset_args.per_flow, "on-script dialogues per workflow");
  dataset_cmd->add_flag("--include-samples", dataset_args.include_samples,
                        "append the two transcript samples");
  dataset_cmd->add_option("--kb", dataset_args.kb_path, "KB json (default: embedded)");

  KbArgs kb_args;
  auto* kb_cmd = app.add_subcommand("kb", "dump the knowledge base");
  kb_cmd->add_option("--out", kb_args.out, "KB json path (default: stdout)");
  kb_cmd->add_option("--kb", kb_args.kb_path, "KB json to load first (default: embedded)");
  kb_cmd->add_flag("--extra-verification", kb_args.extra_verification,
                   "apply the extra-verification perturbation first");

  try {
    app.parse(argc, argv);
    if (plan_cmd->parsed()) return run_plan(plan_args);
    if (split_cmd->parsed()) return run_split(split_args);
    if (ctx_cmd->parsed()) return run_build_contexts(ctx_args);
    if (predict_cmd->parsed()) return run_predict(predict_args);
    if (score_cmd->parsed()) return run_score(score_args);
    if (dataset_cmd->parsed()) return run_dataset(dataset_args);
    if (kb_cmd->parsed()) return run_kb(kb_args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case Errc::kAgentUnavailable:
      case Errc::kTimeout:
      case Errc::kSearchBudgetExceeded:
      case Errc::kUnsolvable:
        return 1;
      default:
        return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
