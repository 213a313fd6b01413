#include "doctest.h"
#include "flowplan/fixtures.hpp"
#include "flowplan/prompt.hpp"
#include "test_util.hpp"

using namespace flowplan;
using testutil::thrown_code;

namespace {

bool ends_with(const std::string& text, const std::string& suffix) {
  return text.size() >= suffix.size() && text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

TEST_CASE("prompt config parsing and invariants") {
  CHECK(PromptConfig::from_string("LFP").include_legal_flows);
  CHECK(PromptConfig::from_string("F+P").include_plan);
  CHECK(PromptConfig::from_string("FP(s)").include_plan_slots);
  CHECK(PromptConfig::from_string("none") == PromptConfig{});
  CHECK(PromptConfig::from_string("LFP").to_string() == "LFP");
  CHECK(thrown_code([] { PromptConfig::from_string("P"); }) == Errc::kInvalidArgument);
  CHECK(thrown_code([] { PromptConfig::from_string("q"); }) == Errc::kInvalidArgument);
}

TEST_CASE("contexts carry the flow and the shrinking plan") {
  const auto& kb = fixtures::abcd_kb();
  const Dialogue d = fixtures::sample_recover_password_dialogue();
  const PromptConfig cfg = PromptConfig::from_string("FP");

  // Turn 3 of the transcript (index 2): nothing executed yet.
  ActionPlan plan = remaining_plan(kb, d.flow, {}, PlanMode::kLookup);
  AugmentedContext ctx = build_context(d, 2, cfg, {}, d.flow, &plan);
  CHECK(ends_with(ctx.text,
                  "flow: recover_password; action_plan: pull-up-account, enter-details, "
                  "make-password;"));
  CHECK(ctx.text.rfind("agent: Hello, how can i help you today customer:", 0) == 0);

  // Turn 8 (index 7): all three actions executed, plan renders empty.
  plan = remaining_plan(kb, d.flow, {"pull-up-account", "enter-details", "make-password"},
                        PlanMode::kLookup);
  ctx = build_context(d, 7, cfg, {}, d.flow, &plan);
  CHECK(ends_with(ctx.text, "flow: recover_password; action_plan: ;"));
}

TEST_CASE("the rendered plan shrinks by one after each executed gold action") {
  const auto& kb = fixtures::abcd_kb();
  const Dialogue d = fixtures::sample_recover_password_dialogue();
  const PromptConfig cfg = PromptConfig::from_string("FP");

  std::vector<std::string> executed;
  std::vector<size_t> lengths;
  for (size_t i = 0; i < d.turns.size(); ++i) {
    const Turn& t = d.turns[i];
    if (!t.is_action()) continue;
    ActionPlan plan = remaining_plan(kb, d.flow, executed, PlanMode::kLookup);
    lengths.push_back(plan.actions().size());
    executed.push_back(t.action->name);
  }
  CHECK(lengths == std::vector<size_t>{3, 2, 1});
}

TEST_CASE("empty config and empty history yield the empty context") {
  const Dialogue d = fixtures::sample_recover_password_dialogue();
  const AugmentedContext ctx = build_context(d, 0, PromptConfig{}, {}, "", nullptr);
  CHECK(ctx.text.empty());
}

TEST_CASE("legal flows render verbatim at the front") {
  const Dialogue d = fixtures::sample_recover_password_dialogue();
  const PromptConfig cfg = PromptConfig::from_string("L");
  const std::vector<std::string> legal = {"pricing", "made_up_flow", "boots"};
  const AugmentedContext ctx = build_context(d, 1, cfg, legal, "", nullptr);
  CHECK(ctx.text.rfind("legal_flows: pricing, made_up_flow, boots; agent:", 0) == 0);
}

TEST_CASE("missing inputs are errors") {
  const Dialogue d = fixtures::sample_recover_password_dialogue();
  CHECK(thrown_code([&] {
          build_context(d, 1, PromptConfig::from_string("FP"), {}, d.flow, nullptr);
        }) == Errc::kMissingPlan);
  CHECK(thrown_code([&] {
          build_context(d, 1, PromptConfig::from_string("F"), {}, "", nullptr);
        }) == Errc::kMissingFlow);
}

TEST_CASE("slot-augmented plans interleave slot names") {
  const auto& kb = fixtures::abcd_kb();
  const Dialogue d = fixtures::sample_recover_password_dialogue();
  const PromptConfig cfg = PromptConfig::from_string("FP(s)");
  ActionPlan plan = remaining_plan(kb, "recover_username", {}, PlanMode::kReplan, true);
  const AugmentedContext ctx = build_context(d, 0, cfg, {}, "recover_username", &plan);
  CHECK(ctx.text.find("action_plan: ") != std::string::npos);
  CHECK(ctx.text.find("order_id") != std::string::npos);
  CHECK(ctx.text.find("pull-up-account") != std::string::npos);
}

TEST_CASE("build_target") {
  CHECK(build_target(Turn::act("pull-up-account", {"crystal minh"}), "recover_password") ==
        "flow: recover_password; action: pull-up-account: crystal minh");
  CHECK(build_target(Turn::agent("Okay, have a nice day"), "recover_password") ==
        "flow: recover_password; agent: Okay, have a nice day");
  CHECK(build_target(Turn::act("make-password", {}), "recover_password") ==
        "flow: recover_password; action: make-password: ");
  CHECK(thrown_code([] { build_target(Turn::customer("hi"), "f"); }) == Errc::kCustomerTurn);
}
