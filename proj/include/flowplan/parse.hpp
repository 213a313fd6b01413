#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowplan/prompt.hpp"

namespace flowplan {

enum class PredictionKind { kAction, kUtterance, kMalformed };
enum class ExpectedKind { kAction, kUtterance };

const char* expected_kind_name(ExpectedKind kind);
ExpectedKind expected_kind_from_name(const std::string& name);

// Malformed predictions carry no payload at all.
struct ParsedPrediction {
  PredictionKind kind = PredictionKind::kMalformed;
  std::optional<std::string> flow;
  std::optional<std::string> action_name;
  std::vector<std::string> slot_values;
  std::optional<std::string> utterance;

  bool operator==(const ParsedPrediction&) const = default;
};

// Applies the expected-format pattern for the expected turn kind:
//   action turns:    flow: <flow>; action: <name>: <v1>, <v2>
//   utterance turns: flow: <flow>; agent: <text>
// The flow capture stops at the first ';'; the name/values split is at the last
// ':'; captured groups are whitespace-trimmed and values split on commas. When
// the config carries no F the flow prefix is optional. Anything else is
// malformed (a value, not an error).
ParsedPrediction parse_prediction(const std::string& text, ExpectedKind expected,
                                  const PromptConfig& cfg);

}  // namespace flowplan
