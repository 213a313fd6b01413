#include <random>

#include "doctest.h"
#include "flowplan/fixtures.hpp"
#include "flowplan/parse.hpp"

using namespace flowplan;

namespace {

const PromptConfig kWithFlow = PromptConfig::from_string("F");

}  // namespace

TEST_CASE("action predictions parse into their parts") {
  const auto parsed = parse_prediction("flow: recover_password; action: enter-details: cm374950",
                                       ExpectedKind::kAction, kWithFlow);
  CHECK(parsed.kind == PredictionKind::kAction);
  CHECK(parsed.flow == "recover_password");
  CHECK(parsed.action_name == "enter-details");
  CHECK(parsed.slot_values == std::vector<std::string>{"cm374950"});
}

TEST_CASE("repeated slot values survive parsing") {
  const auto parsed =
      parse_prediction("flow: reset_2fa; action: verify-identity: 69233, asanders1, asanders1",
                       ExpectedKind::kAction, kWithFlow);
  CHECK(parsed.slot_values == std::vector<std::string>{"69233", "asanders1", "asanders1"});
}

TEST_CASE("wrong-kind outputs are malformed") {
  const auto parsed = parse_prediction("flow: recover_password; agent: Have a great day",
                                       ExpectedKind::kAction, kWithFlow);
  CHECK(parsed.kind == PredictionKind::kMalformed);
  CHECK_FALSE(parsed.flow.has_value());
  CHECK_FALSE(parsed.action_name.has_value());
  CHECK(parsed.slot_values.empty());

  const auto reverse = parse_prediction("flow: x; action: y: z", ExpectedKind::kUtterance, kWithFlow);
  CHECK(reverse.kind == PredictionKind::kMalformed);
}

TEST_CASE("utterance predictions parse") {
  const auto parsed = parse_prediction("flow: recover_password; agent: Okay, have a nice day",
                                       ExpectedKind::kUtterance, kWithFlow);
  CHECK(parsed.kind == PredictionKind::kUtterance);
  CHECK(parsed.flow == "recover_password");
  CHECK(parsed.utterance == "Okay, have a nice day");
}

TEST_CASE("format edge cases") {
  SUBCASE("empty slot section") {
    const auto parsed = parse_prediction("flow: f; action: make-password: ",
                                         ExpectedKind::kAction, kWithFlow);
    CHECK(parsed.kind == PredictionKind::kAction);
    CHECK(parsed.slot_values.empty());
  }
  SUBCASE("missing value separator colon") {
    CHECK(parse_prediction("flow: f; action: make-password", ExpectedKind::kAction, kWithFlow)
              .kind == PredictionKind::kMalformed);
  }
  SUBCASE("missing flow when config carries F") {
    CHECK(parse_prediction("action: x: y", ExpectedKind::kAction, kWithFlow).kind ==
          PredictionKind::kMalformed);
  }
  SUBCASE("missing flow is fine without F") {
    const auto parsed =
        parse_prediction("action: x: y", ExpectedKind::kAction, PromptConfig{});
    CHECK(parsed.kind == PredictionKind::kAction);
    CHECK_FALSE(parsed.flow.has_value());
    CHECK(parsed.action_name == "x");
  }
  SUBCASE("flow still captured without F when present") {
    const auto parsed = parse_prediction("flow: f; agent: hi", ExpectedKind::kUtterance,
                                         PromptConfig{});
    CHECK(parsed.flow == "f");
  }
  SUBCASE("whitespace is trimmed and empty items dropped") {
    const auto parsed = parse_prediction("flow:  f ;  action:  a :  x ,  , y ",
                                         ExpectedKind::kAction, kWithFlow);
    CHECK(parsed.flow == "f");
    CHECK(parsed.action_name == "a");
    CHECK(parsed.slot_values == std::vector<std::string>{"x", "y"});
  }
  SUBCASE("value text keeps extra colons with the action name") {
    const auto parsed = parse_prediction("flow: f; action: notify-team: placing-order: now",
                                         ExpectedKind::kAction, kWithFlow);
    CHECK(parsed.action_name == "notify-team: placing-order");
    CHECK(parsed.slot_values == std::vector<std::string>{"now"});
  }
  SUBCASE("flow capture stops at the first semicolon") {
    const auto parsed = parse_prediction("flow: f; agent: one; two; three",
                                         ExpectedKind::kUtterance, kWithFlow);
    CHECK(parsed.flow == "f");
    CHECK(parsed.utterance == "one; two; three");
  }
  SUBCASE("free text is malformed") {
    CHECK(parse_prediction("I think the answer is boots", ExpectedKind::kAction, kWithFlow).kind ==
          PredictionKind::kMalformed);
    CHECK(parse_prediction("", ExpectedKind::kUtterance, kWithFlow).kind ==
          PredictionKind::kMalformed);
  }
}

TEST_CASE("targets round-trip through the parser") {
  const auto& kb = fixtures::abcd_kb();
  const auto flows = kb.workflow_names();
  const auto actions = kb.action_names();
  std::mt19937 rng(20240817);
  auto pick = [&rng](const std::vector<std::string>& pool) {
    return pool[std::uniform_int_distribution<size_t>(0, pool.size() - 1)(rng)];
  };
  const std::vector<std::string> value_pool = {"crystal minh", "cm374950", "9912",
                                               "blue boots", "asanders1", "a-b-c"};
  const std::vector<std::string> utterance_pool = {
      "Okay, have a nice day", "Can I first start with your full name?", "one moment",
      "Your password is rox6fnwo33e", "did you have any other questions today?"};

  for (int i = 0; i < 1000; ++i) {
    const std::string flow = pick(flows);
    Turn turn = Turn::agent("");
    if (i % 2 == 0) {
      std::vector<std::string> values;
      const size_t n = static_cast<size_t>(i) % 4;
      for (size_t v = 0; v < n; ++v) values.push_back(pick(value_pool));
      turn = Turn::act(pick(actions), values);
    } else {
      turn = Turn::agent(pick(utterance_pool));
    }
    const std::string target = build_target(turn, flow);
    const ExpectedKind kind = turn.is_action() ? ExpectedKind::kAction : ExpectedKind::kUtterance;
    const ParsedPrediction parsed = parse_prediction(target, kind, kWithFlow);

    CHECK(parsed.flow == flow);
    if (turn.is_action()) {
      CHECK(parsed.kind == PredictionKind::kAction);
      CHECK(parsed.action_name == turn.action->name);
      CHECK(parsed.slot_values == turn.action->values);
    } else {
      CHECK(parsed.kind == PredictionKind::kUtterance);
      CHECK(parsed.utterance == turn.utterance);
    }
  }
}
