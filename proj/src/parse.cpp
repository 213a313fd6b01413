#include "flowplan/parse.hpp"

namespace flowplan {

const char* expected_kind_name(ExpectedKind kind) {
  return kind == ExpectedKind::kAction ? "action" : "utterance";
}

ExpectedKind expected_kind_from_name(const std::string& name) {
  if (name == "action") return ExpectedKind::kAction;
  if (name == "utterance") return ExpectedKind::kUtterance;
  throw_error(Errc::kInvalidArgument, "unknown expected kind '" + name + "'");
}

namespace {

std::string trim(std::string_view s) {
  size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return std::string(s.substr(begin, end - begin));
}

std::vector<std::string> split_values(std::string_view s) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= s.size()) {
    const size_t comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                            : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

ParsedPrediction parse_prediction(const std::string& text, ExpectedKind expected,
                                  const PromptConfig& cfg) {
  ParsedPrediction result;  // kMalformed until fully matched
  std::string_view rest = text;
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);

  std::optional<std::string> flow;
  if (rest.rfind("flow:", 0) == 0) {
    rest.remove_prefix(5);
    const size_t semi = rest.find(';');
    if (semi == std::string_view::npos) return result;
    flow = trim(rest.substr(0, semi));
    rest.remove_prefix(semi + 1);
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front())))
      rest.remove_prefix(1);
  } else if (cfg.include_flow) {
    return result;
  }

  if (expected == ExpectedKind::kAction) {
    if (rest.rfind("action:", 0) != 0) return result;
    rest.remove_prefix(7);
    const size_t colon = rest.rfind(':');
    if (colon == std::string_view::npos) return result;
    result.kind = PredictionKind::kAction;
    result.flow = std::move(flow);
    result.action_name = trim(rest.substr(0, colon));
    result.slot_values = split_values(rest.substr(colon + 1));
    return result;
  }

  if (rest.rfind("agent:", 0) != 0) return result;
  rest.remove_prefix(6);
  result.kind = PredictionKind::kUtterance;
  result.flow = std::move(flow);
  result.utterance = trim(rest);
  return result;
}

}  // namespace flowplan
