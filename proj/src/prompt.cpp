#include "flowplan/prompt.hpp"

namespace flowplan {

PromptConfig PromptConfig::from_string(const std::string& spec) {
  PromptConfig cfg;
  if (spec == "none") return cfg;
  for (size_t i = 0; i < spec.size(); ++i) {
    switch (spec[i]) {
      case 'L': case 'l': cfg.include_legal_flows = true; break;
      case 'F': case 'f': cfg.include_flow = true; break;
      case 'P': case 'p':
        cfg.include_plan = true;
        if (i + 3 <= spec.size() && spec.compare(i + 1, 3, "(s)") == 0) {
          cfg.include_plan_slots = true;
          i += 3;
        }
        break;
      case '+': break;
      default:
        throw_error(Errc::kInvalidArgument, "unknown prompt config flag '" + spec.substr(i, 1) + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::string PromptConfig::to_string() const {
  std::string out;
  if (include_legal_flows) out += 'L';
  if (include_flow) out += 'F';
  if (include_plan) out += include_plan_slots ? "P(s)" : "P";
  return out.empty() ? "none" : out;
}

void PromptConfig::validate() const {
  if (include_plan && !include_flow)
    throw_error(Errc::kInvalidArgument, "a plan must be preceded by the flow label (P requires F)");
  if (include_plan_slots && !include_plan)
    throw_error(Errc::kInvalidArgument, "slot-augmented plans require P");
}

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

}  // namespace

AugmentedContext build_context(const Dialogue& d, std::size_t upto, const PromptConfig& cfg,
                               const std::vector<std::string>& legal_flows, const std::string& flow,
                               const ActionPlan* plan) {
  cfg.validate();
  if (cfg.include_flow && flow.empty())
    throw_error(Errc::kMissingFlow, "flow label required for this prompt config");
  if (cfg.include_plan && plan == nullptr)
    throw_error(Errc::kMissingPlan, "action plan required for this prompt config");

  std::vector<std::string> parts;
  if (cfg.include_legal_flows) parts.push_back("legal_flows: " + join(legal_flows) + ";");
  std::string history = serialize_history(d, upto);
  if (!history.empty()) parts.push_back(std::move(history));
  if (cfg.include_flow) parts.push_back("flow: " + flow + ";");
  if (cfg.include_plan) {
    const auto tokens = cfg.include_plan_slots ? plan->tokens() : plan->actions();
    parts.push_back("action_plan: " + join(tokens) + ";");
  }

  AugmentedContext ctx;
  ctx.turn_index = upto;
  ctx.config = cfg;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) ctx.text += ' ';
    ctx.text += parts[i];
  }
  return ctx;
}

std::string build_target(const Turn& t, const std::string& flow) {
  if (t.speaker == Speaker::kCustomer)
    throw_error(Errc::kCustomerTurn, "customer turns are never prediction targets");
  return "flow: " + flow + "; " + serialize_turn(t);
}

}  // namespace flowplan
