#include "flowplan/fixtures.hpp"

#include <sstream>

namespace flowplan::fixtures {

namespace {

// Split bits mark test-side membership: 1 = split1, 2 = split2, 4 = split3.
struct WorkflowRow {
  const char* group;
  const char* prefix;
  const char* name;
  const char* sequence;
  unsigned test_bits;
};

constexpr unsigned kS1 = 1, kS2 = 2, kS3 = 4;

const WorkflowRow kWorkflows[] = {
    {"account_access", "recover_", "recover_username", "pull-up-account, verify-identity", kS3},
    {"account_access", "recover_", "recover_password", "pull-up-account, enter-details, make-password", kS3},
    {"account_access", "reset_", "reset_2fa", "pull-up-account, enter-details, send-link", kS1 | kS2 | kS3},

    {"manage_account", "status_", "status_service_added", "pull-up-account, record-reason, ask-the-oracle, update-account, offer-refund", 0},
    {"manage_account", "status_", "status_service_removed", "pull-up-account, record-reason, ask-the-oracle, update-account", 0},
    {"manage_account", "status_", "status_shipping_question", "pull-up-account, ask-the-oracle, send-link", kS1 | kS2},
    {"manage_account", "status_", "status_credit_missing", "pull-up-account, record-reason, ask-the-oracle, promo-code", kS1 | kS2},
    {"manage_account", "manage_", "manage_change_address", "pull-up-account, record-reason, verify-identity, update-account", kS2},
    {"manage_account", "manage_", "manage_change_name", "pull-up-account, record-reason, verify-identity, update-account", kS2},
    {"manage_account", "manage_", "manage_change_phone", "pull-up-account, record-reason, verify-identity, update-account", kS1 | kS2},
    {"manage_account", "manage_", "manage_payment_method", "pull-up-account, record-reason, verify-identity, update-account", kS1 | kS2},

    {"order_issue", "status_", "status_mystery_fee", "pull-up-account, verify-identity, ask-the-oracle, membership, update-order", 0},
    {"order_issue", "status_", "status_delivery_time", "pull-up-account, verify-identity, ask-the-oracle, shipping-status, update-order", 0},
    {"order_issue", "status_", "status_payment_method", "pull-up-account, verify-identity, shipping-status, update-order", kS1 | kS2},
    {"order_issue", "status_", "status_quantity", "pull-up-account, verify-identity, ask-the-oracle, shipping-status, offer-refund", kS1 | kS2},
    {"order_issue", "manage_", "manage_upgrade", "pull-up-account, verify-identity, shipping-status, membership, update-order", 0},
    {"order_issue", "manage_", "manage_downgrade", "pull-up-account, verify-identity, shipping-status, membership, update-order", kS1},
    {"order_issue", "manage_", "manage_create", "pull-up-account, verify-identity, shipping-status, membership, make-purchase", kS2},
    {"order_issue", "manage_", "manage_cancel", "pull-up-account, verify-identity, shipping-status, membership, offer-refund", kS1 | kS2},

    {"product_defect", "refund_", "refund_initiate", "pull-up-account, validate-purchase, record-reason, enter-details, offer-refund", 0},
    {"product_defect", "refund_", "refund_update", "pull-up-account, validate-purchase, record-reason, offer-refund", 0},
    {"product_defect", "refund_", "refund_status", "pull-up-account, validate-purchase, notify-team, update-order", kS1 | kS2},
    {"product_defect", "return_", "return_stain", "pull-up-account, validate-purchase, membership, enter-details, update-order", kS2},
    {"product_defect", "return_", "return_color", "pull-up-account, validate-purchase, membership, enter-details, update-order", kS2},
    {"product_defect", "return_", "return_size", "pull-up-account, validate-purchase, membership, enter-details, update-order", kS1 | kS2},

    {"purchase_dispute", "bad_price_", "bad_price_competitor", "pull-up-account, record-reason, verify-identity, promo-code", kS1 | kS3},
    {"purchase_dispute", "bad_price_", "bad_price_yesterday", "pull-up-account, record-reason, verify-identity, promo-code", kS3},
    {"purchase_dispute", "out_of_stock_", "out_of_stock_general", "pull-up-account, notify-team, promo-code", kS3},
    {"purchase_dispute", "out_of_stock_", "out_of_stock_one_item", "pull-up-account, record-reason, notify-team, make-purchase", kS1 | kS2 | kS3},
    {"purchase_dispute", "promo_code_", "promo_code_invalid", "pull-up-account, ask-the-oracle, membership, promo-code", kS2 | kS3},
    {"purchase_dispute", "promo_code_", "promo_code_out_of_date", "pull-up-account, ask-the-oracle, membership, promo-code", kS2 | kS3},
    {"purchase_dispute", "mistimed_billing_", "mistimed_billing_already_returned", "pull-up-account, validate-purchase, record-reason, membership, update-order", kS3},
    {"purchase_dispute", "mistimed_billing_", "mistimed_billing_never_bought", "pull-up-account, validate-purchase, ask-the-oracle, membership, update-order", kS2 | kS3},

    {"shipping_issue", "status", "status", "pull-up-account, verify-identity, validate-purchase, ask-the-oracle, update-order", kS3},
    {"shipping_issue", "manage", "manage", "pull-up-account, shipping-status, validate-purchase, update-order", kS3},
    {"shipping_issue", "missing", "missing", "pull-up-account, validate-purchase, record-reason, update-order, make-purchase", kS1 | kS2 | kS3},
    {"shipping_issue", "cost", "cost", "pull-up-account, validate-purchase, shipping-status, update-order, offer-refund", kS1 | kS2 | kS3},

    {"single_item_query", "boots", "boots", "search-faq, search-boots, select-faq", kS3},
    {"single_item_query", "shirt", "shirt", "search-faq, search-shirt, select-faq", kS3},
    {"single_item_query", "jeans", "jeans", "search-faq, search-jeans, select-faq", kS3},
    {"single_item_query", "jacket", "jacket", "search-faq, search-jacket, select-faq", kS3},

    {"storewide_query", "pricing", "pricing", "search-faq, search-pricing, select-faq", 0},
    {"storewide_query", "membership", "membership", "search-faq, search-membership, select-faq", 0},
    {"storewide_query", "timing", "timing", "search-faq, search-timing, select-faq", 0},
    {"storewide_query", "policy", "policy", "search-faq, search-policy, select-faq", 0},

    {"subscription_inquiry", "status_", "status_active", "pull-up-account, verify-identity, subscription-status, send-link, enter-details", kS3},
    {"subscription_inquiry", "status_", "status_due_amount", "pull-up-account, verify-identity, subscription-status, send-link, enter-details", kS3},
    {"subscription_inquiry", "status_", "status_due_date", "pull-up-account, verify-identity, subscription-status, send-link, enter-details", kS1 | kS3},
    {"subscription_inquiry", "manage_", "manage_pay_bill", "pull-up-account, verify-identity, subscription-status, enter-details, update-account", kS2 | kS3},
    {"subscription_inquiry", "manage_", "manage_extension", "pull-up-account, verify-identity, membership, update-account, enter-details", kS2 | kS3},
    {"subscription_inquiry", "manage_", "manage_dispute_bill", "pull-up-account, verify-identity, membership, ask-the-oracle, offer-refund", kS1 | kS2 | kS3},

    // credit_card and slow_speed carry the split-2 test mark so no test-side
    // action sequence also appears on the training side.
    {"troubleshoot_site", "credit_", "credit_card", "try-again, log-out-in, enter-details, make-purchase", kS2 | kS3},
    {"troubleshoot_site", "shopping_", "shopping_cart", "try-again, log-out-in, enter-details, make-purchase", kS1 | kS2 | kS3},
    {"troubleshoot_site", "search_", "search_results", "try-again, log-out-in, make-purchase, instructions, notify-team", kS2 | kS3},
    {"troubleshoot_site", "slow_", "slow_speed", "try-again, log-out-in, make-purchase, instructions, notify-team", kS1 | kS2 | kS3},
};

struct ActionRow {
  const char* name;
  SlotRule kind;
  int k;
  const char* slots;
};

// Slot requirements beyond the four documented ones (pull-up-account,
// verify-identity, validate-purchase, enter-details) are modeling defaults:
// one slot at most, per the ontology's "one of the possible slots" rule.
const ActionRow kActions[] = {
    {"pull-up-account", SlotRule::kAll, 0, "customer_name, account_id, shipping_option, payment_method"},
    {"verify-identity", SlotRule::kAll, 0, "customer_name, account_id, order_id, zip_code"},
    {"validate-purchase", SlotRule::kAll, 0, "username, email, order_id"},
    {"enter-details", SlotRule::kOneOf, 0, "details, full_address, account_id, username, email, pin_number, security_answer"},
    {"make-password", SlotRule::kNone, 0, ""},
    {"send-link", SlotRule::kNone, 0, ""},
    {"record-reason", SlotRule::kOneOf, 0, "reason"},
    {"ask-the-oracle", SlotRule::kNone, 0, ""},
    {"update-account", SlotRule::kOneOf, 0, "account_change"},
    {"update-order", SlotRule::kOneOf, 0, "order_change"},
    {"offer-refund", SlotRule::kOneOf, 0, "refund_amount"},
    {"promo-code", SlotRule::kOneOf, 0, "discount_amount"},
    {"shipping-status", SlotRule::kOneOf, 0, "order_id"},
    {"membership", SlotRule::kOneOf, 0, "membership_level"},
    {"make-purchase", SlotRule::kOneOf, 0, "product_name"},
    {"notify-team", SlotRule::kOneOf, 0, "details"},
    {"search-faq", SlotRule::kNone, 0, ""},
    {"search-boots", SlotRule::kNone, 0, ""},
    {"search-shirt", SlotRule::kNone, 0, ""},
    {"search-jeans", SlotRule::kNone, 0, ""},
    {"search-jacket", SlotRule::kNone, 0, ""},
    {"search-pricing", SlotRule::kNone, 0, ""},
    {"search-membership", SlotRule::kNone, 0, ""},
    {"search-timing", SlotRule::kNone, 0, ""},
    {"search-policy", SlotRule::kNone, 0, ""},
    {"select-faq", SlotRule::kOneOf, 0, "faq_answer"},
    {"try-again", SlotRule::kNone, 0, ""},
    {"log-out-in", SlotRule::kOneOf, 0, "username"},
    {"instructions", SlotRule::kNone, 0, ""},
    {"subscription-status", SlotRule::kNone, 0, ""},
};

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto begin = item.find_first_not_of(' ');
    if (begin == std::string::npos) continue;
    out.push_back(item.substr(begin));
  }
  return out;
}

}  // namespace

const KnowledgeBase& abcd_kb() {
  static const KnowledgeBase kb = [] {
    std::map<std::string, WorkflowSpec> workflows;
    for (const WorkflowRow& row : kWorkflows) {
      WorkflowSpec spec;
      spec.name = row.name;
      spec.group = row.group;
      spec.prefix = row.prefix;
      spec.action_sequence = split_csv(row.sequence);
      workflows[row.name] = std::move(spec);
    }
    std::map<std::string, SlotRequirement> actions;
    for (const ActionRow& row : kActions) {
      SlotRequirement req;
      req.kind = row.kind;
      req.k = row.k;
      req.slots = split_csv(row.slots);
      actions[row.name] = std::move(req);
    }
    return KnowledgeBase::from_parts(std::move(workflows), std::move(actions));
  }();
  return kb;
}

SplitSpec abcd_split(SplitKind kind) {
  SplitSpec spec;
  spec.kind = kind;
  unsigned bit = 0;
  switch (kind) {
    case SplitKind::kStandard: bit = 0; break;
    case SplitKind::kSplit1: bit = kS1; break;
    case SplitKind::kSplit2: bit = kS2; break;
    case SplitKind::kSplit3: bit = kS3; break;
  }
  for (const WorkflowRow& row : kWorkflows) {
    if (kind == SplitKind::kStandard)
      spec.assignment[row.name] = Membership::kBoth;
    else
      spec.assignment[row.name] = (row.test_bits & bit) ? Membership::kTest : Membership::kTrain;
  }
  return spec;
}

KbPerturbation extra_verification_perturbation() {
  return {"account-uncompromised", "verify-identity", "extra-verification"};
}

Dialogue sample_recover_password_dialogue() {
  Dialogue d;
  d.id = "6601";
  d.flow = "recover_password";
  d.turns = {
      Turn::agent("Hello, how can i help you today"),
      Turn::customer("Hi I forgot my password to my account. My name is Crystal Minh."),
      Turn::act("pull-up-account", {"crystal minh"}),
      Turn::agent("Okay, could i get your username please"),
      Turn::customer("cm374950"),
      Turn::act("enter-details", {"cm374950"}),
      Turn::act("make-password", {}),
      Turn::agent("Okay, here is your new password 3mihalbfbem"),
      Turn::agent("You can log in and change it again if you want to. Is there anything else i can help you with"),
      Turn::customer("great. thanks"),
      Turn::customer("that's all"),
      Turn::agent("Okay, have a nice day"),
  };
  return d;
}

Dialogue sample_mislabeled_reset_2fa_dialogue() {
  Dialogue d;
  d.id = "2049";
  d.flow = "reset_2fa";
  d.turns = {
      Turn::agent("Hi! Thank you for contacting Acme today. How may I help you?"),
      Turn::customer("yes, i can't access my account because i lost my phone"),
      Turn::agent("I am so sorry to hear you lost your phone.  Do you need to get your username and password or do you have one of them?"),
      Turn::customer("can i give you my phone number instead"),
      Turn::agent("Can I first start with your full name?"),
      Turn::customer("Albert Sanders"),
      Turn::act("pull-up-account", {"albert sanders"}),
      Turn::agent("Can you also provide me with your phone number and email address"),
      Turn::customer("i don't have an email. the phone number is 330-822-4754"),
      Turn::agent("Ok, that is fine.  What is your zip code"),
      Turn::act("verify-identity", {"albert sanders", "69233", "330-822-4754"}),
      Turn::agent("Thank you for all the information.  Your username is asanders1"),
      Turn::customer("ha..of course"),
      Turn::agent("I can not actually view your old password for security reason so I have to create a new one"),
      Turn::customer("ok"),
      Turn::agent("Can I have your account pin or the answer to your security question"),
      Turn::customer("security question answer is Alexander"),
      Turn::agent("Thank you. One moment while I generate the password"),
      Turn::act("make-password", {}),
      Turn::agent("Your password is rox6fnwo33e"),
      Turn::customer("ok great"),
      Turn::agent("did you have any other questions today?"),
      Turn::customer("nope. thanks so much!"),
      Turn::agent("You're Welcome.  Have a great day"),
  };
  return d;
}

namespace {

std::string humanize(const std::string& token) {
  std::string out = token;
  for (char& c : out)
    if (c == '_' || c == '-') c = ' ';
  return out;
}

std::string value_for(const std::string& flow, const std::string& slot, int copy) {
  // Deterministic, comma-free pseudo-values.
  unsigned h = 2166136261u;
  for (char c : flow + "/" + slot) h = (h ^ static_cast<unsigned>(c)) * 16777619u;
  h = h % 9000u + 1000u + static_cast<unsigned>(copy);
  return humanize(slot) + " " + std::to_string(h);
}

}  // namespace

std::vector<Dialogue> synthetic_dataset(const KnowledgeBase& kb, int dialogues_per_flow) {
  std::vector<Dialogue> out;
  for (const auto& [flow, spec] : kb.workflows()) {
    for (int copy = 0; copy < dialogues_per_flow; ++copy) {
      Dialogue d;
      d.id = flow + "-" + std::to_string(copy);
      d.flow = flow;
      d.turns.push_back(Turn::agent("Hello, how can i help you today"));
      d.turns.push_back(Turn::customer("i need help, my issue is " + humanize(flow)));
      for (const auto& action : spec.action_sequence) {
        const auto combos = kb.action(action).combinations();
        std::vector<std::string> values;
        for (const auto& slot : combos.front()) values.push_back(value_for(flow, slot, copy));
        d.turns.push_back(Turn::agent("one moment, i will " + humanize(action)));
        if (!values.empty()) {
          std::string payload = values.front();
          for (size_t i = 1; i < values.size(); ++i) payload += " and " + values[i];
          d.turns.push_back(Turn::customer("sure, it is " + payload));
        }
        d.turns.push_back(Turn::act(action, values));
      }
      d.turns.push_back(Turn::agent("is there anything else i can help you with"));
      d.turns.push_back(Turn::customer("no thanks"));
      d.turns.push_back(Turn::agent("have a nice day"));
      out.push_back(std::move(d));
    }
  }
  return out;
}

Dialogue synthetic_instructions_deviation_dialogue() {
  Dialogue d;
  d.id = "pricing-deviation-0";
  d.flow = "pricing";
  d.turns = {
      Turn::agent("Hello, how can i help you today"),
      Turn::customer("how does your pricing work"),
      Turn::act("search-faq", {}),
      Turn::act("instructions", {}),
      Turn::act("search-pricing", {}),
      Turn::act("select-faq", {"pricing faq 12"}),
      Turn::agent("is there anything else i can help you with"),
      Turn::customer("no thanks"),
      Turn::agent("have a nice day"),
  };
  return d;
}

}  // namespace flowplan::fixtures
