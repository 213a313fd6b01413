#include <algorithm>

#include "doctest.h"
#include "flowplan/fixtures.hpp"
#include "flowplan/kb.hpp"
#include "test_util.hpp"

using namespace flowplan;
using testutil::thrown_code;

namespace {

const char* kSmallDoc = R"({
  "workflows": {
    "recover_username": ["pull-up-account", "verify-identity"],
    "recover_password": ["pull-up-account", "enter-details", "make-password"]
  },
  "prefix_groups": {
    "recover_username": "recover_",
    "recover_password": "recover_"
  },
  "groups": {
    "recover_username": "account_access",
    "recover_password": "account_access"
  },
  "actions": {
    "pull-up-account": {"kind": "all", "slots": ["customer_name", "account_id"]},
    "verify-identity": {"kind": "any_k", "k": 3, "slots": ["customer_name", "account_id", "order_id", "zip_code"]},
    "enter-details": {"kind": "one_of", "slots": ["username", "email"]},
    "make-password": {"kind": "none", "slots": []}
  }
})";

}  // namespace

TEST_CASE("load_kb accepts a well-formed document") {
  const KnowledgeBase kb = load_kb(kSmallDoc);
  REQUIRE(kb.has_workflow("recover_username"));
  const WorkflowSpec& spec = kb.workflow("recover_username");
  CHECK(spec.action_sequence == std::vector<std::string>{"pull-up-account", "verify-identity"});
  CHECK(spec.prefix == "recover_");
  CHECK(spec.group == "account_access");
  CHECK(kb.action("make-password").kind == SlotRule::kNone);
  CHECK(kb.action("verify-identity").k == 3);
}

TEST_CASE("load_kb rejects bad documents") {
  SUBCASE("empty workflow table") {
    CHECK(thrown_code([] { load_kb(R"({"workflows": {}, "actions": {}})"); }) ==
          Errc::kMalformedDocument);
  }
  SUBCASE("reference to an undeclared action") {
    CHECK(thrown_code([] {
            load_kb(R"({"workflows": {"w": ["foo"]}, "actions": {"bar": {"kind": "none"}}})");
          }) == Errc::kUnknownActionReference);
  }
  SUBCASE("duplicate workflow") {
    CHECK(thrown_code([] {
            load_kb(R"({"workflows": {"w": ["a"], "w": ["a"]},
                        "actions": {"a": {"kind": "none"}}})");
          }) == Errc::kDuplicateWorkflow);
  }
  SUBCASE("not json at all") {
    CHECK(thrown_code([] { load_kb("definitely { not json"); }) == Errc::kMalformedDocument);
  }
  SUBCASE("any_k out of range") {
    CHECK(thrown_code([] {
            load_kb(R"({"workflows": {"w": ["a"]},
                        "actions": {"a": {"kind": "any_k", "k": 5, "slots": ["x"]}}})");
          }) == Errc::kMalformedDocument);
  }
  SUBCASE("none with slots") {
    CHECK(thrown_code([] {
            load_kb(R"({"workflows": {"w": ["a"]},
                        "actions": {"a": {"kind": "none", "slots": ["x"]}}})");
          }) == Errc::kMalformedDocument);
  }
  SUBCASE("immediate duplicate action in a sequence") {
    CHECK(thrown_code([] {
            load_kb(R"({"workflows": {"w": ["a", "a"]},
                        "actions": {"a": {"kind": "none"}}})");
          }) == Errc::kMalformedDocument);
  }
  SUBCASE("uppercase workflow name") {
    CHECK(thrown_code([] {
            load_kb(R"({"workflows": {"Bad": ["a"]}, "actions": {"a": {"kind": "none"}}})");
          }) == Errc::kMalformedDocument);
  }
  SUBCASE("prefix that is not a prefix") {
    CHECK(thrown_code([] {
            load_kb(R"({"workflows": {"w_x": ["a"]}, "prefix_groups": {"w_x": "zz_"},
                        "actions": {"a": {"kind": "none"}}})");
          }) == Errc::kMalformedDocument);
  }
}

TEST_CASE("prefix_of uses the stored table with a first-underscore fallback") {
  const KnowledgeBase& kb = fixtures::abcd_kb();
  CHECK(prefix_of(kb, "status_service_added") == "status_");
  CHECK(prefix_of(kb, "manage_change_name") == "manage_");
  CHECK(prefix_of(kb, "out_of_stock_general") == "out_of_stock_");
  CHECK(prefix_of(kb, "warranty") == "warranty");               // unknown, no underscore
  CHECK(prefix_of(kb, "status_credit_rejected") == "status_");  // unknown, fallback
  CHECK(prefix_of(kb, "boots") == "boots");
}

TEST_CASE("prefix_of always returns a string prefix of the flow") {
  const KnowledgeBase& kb = fixtures::abcd_kb();
  for (const auto& flow : kb.workflow_names()) {
    CHECK(flow.rfind(prefix_of(kb, flow), 0) == 0);
  }
  for (const char* unknown : {"warranty", "a_b_c", "x", "manage_change_password"}) {
    CHECK(std::string(unknown).rfind(prefix_of(kb, unknown), 0) == 0);
  }
}

TEST_CASE("kb serialization round-trips") {
  const KnowledgeBase& kb = fixtures::abcd_kb();
  CHECK(load_kb(serialize_kb(kb)) == kb);

  const auto [perturbed, changed] =
      apply_perturbation(kb, fixtures::extra_verification_perturbation());
  CHECK(load_kb(serialize_kb(perturbed)) == perturbed);
}

TEST_CASE("extra-verification perturbation") {
  const KnowledgeBase& kb = fixtures::abcd_kb();
  const auto [perturbed, changed] =
      apply_perturbation(kb, fixtures::extra_verification_perturbation());

  CHECK(changed.size() == 22);
  CHECK(perturbed.workflow("recover_username").action_sequence ==
        std::vector<std::string>{"pull-up-account", "extra-verification", "verify-identity"});
  CHECK(perturbed.action("extra-verification").kind == SlotRule::kNone);
  CHECK(perturbed.action("verify-identity").mandatory ==
        std::vector<std::string>{"account-uncompromised"});

  // Every changed workflow gained exactly one step per identity check.
  for (const auto& name : changed) {
    const auto& before = kb.workflow(name).action_sequence;
    const auto& after = perturbed.workflow(name).action_sequence;
    const auto checks = std::count(before.begin(), before.end(), "verify-identity");
    CHECK(after.size() == before.size() + static_cast<size_t>(checks));
  }
  // Untouched workflows kept their sequences.
  for (const auto& [name, spec] : kb.workflows()) {
    if (std::find(changed.begin(), changed.end(), name) != changed.end()) continue;
    CHECK(perturbed.workflow(name).action_sequence == spec.action_sequence);
  }

  SUBCASE("re-applying the identical perturbation fails") {
    const KnowledgeBase copy = perturbed;
    CHECK(thrown_code([&] {
            apply_perturbation(copy, fixtures::extra_verification_perturbation());
          }) == Errc::kInvalidPerturbation);
  }
  SUBCASE("a fresh provider name re-applies cleanly") {
    const auto [twice, changed2] =
        apply_perturbation(perturbed, {"double-checked", "verify-identity", "super-verification"});
    CHECK(changed2.size() == 22);
  }
}

TEST_CASE("perturbation guarding an unused action changes nothing") {
  KnowledgeBase base = testutil::toy_kb();
  std::map<std::string, WorkflowSpec> workflows = base.workflows();
  std::map<std::string, SlotRequirement> actions = base.actions();
  actions["idle"] = {SlotRule::kNone, 0, {}, {}};
  const KnowledgeBase kb = KnowledgeBase::from_parts(std::move(workflows), std::move(actions));

  const auto [perturbed, changed] = apply_perturbation(kb, {"extra", "idle", "provide-extra"});
  CHECK(changed.empty());
  for (const auto& [name, spec] : kb.workflows())
    CHECK(perturbed.workflow(name).action_sequence == spec.action_sequence);
}

TEST_CASE("invalid perturbations are rejected") {
  const KnowledgeBase& kb = fixtures::abcd_kb();
  CHECK(thrown_code([&] { apply_perturbation(kb, {"s", "not-an-action", "p"}); }) ==
        Errc::kInvalidPerturbation);
  CHECK(thrown_code([&] { apply_perturbation(kb, {"s", "verify-identity", "membership"}); }) ==
        Errc::kInvalidPerturbation);
  CHECK(thrown_code([&] { apply_perturbation(kb, {"zip_code", "verify-identity", "p"}); }) ==
        Errc::kInvalidPerturbation);
}

TEST_CASE("slot combinations") {
  SlotRequirement any3{SlotRule::kAnyK, 3, {"cn", "ai", "oi", "zc"}, {}};
  const auto combos = any3.combinations();
  REQUIRE(combos.size() == 4);
  CHECK(combos[0] == std::vector<std::string>{"cn", "ai", "oi"});
  CHECK(combos[3] == std::vector<std::string>{"ai", "oi", "zc"});

  SlotRequirement one_of{SlotRule::kOneOf, 0, {"x", "y"}, {"m"}};
  const auto with_mandatory = one_of.combinations();
  REQUIRE(with_mandatory.size() == 2);
  CHECK(with_mandatory[0] == std::vector<std::string>{"x", "m"});
  CHECK(with_mandatory[1] == std::vector<std::string>{"y", "m"});

  const SlotRequirement none{SlotRule::kNone, 0, {}, {}};
  CHECK(none.combinations() == std::vector<std::vector<std::string>>{{}});
}
