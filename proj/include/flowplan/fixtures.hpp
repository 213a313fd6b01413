#pragma once

#include <string>
#include <vector>

#include "flowplan/dialogue.hpp"
#include "flowplan/kb.hpp"

namespace flowplan::fixtures {

// Embedded retail-support knowledge base: 55 workflows in 10 groups over 30
// actions. Ships with the library so everything runs offline.
const KnowledgeBase& abcd_kb();

// Canonical train/test assignment for each split kind.
SplitSpec abcd_split(SplitKind kind);

// The perturbation used by the KB-change experiment: a new verification action
// that must precede every identity check.
KbPerturbation extra_verification_perturbation();

// A password-recovery conversation where the agent follows the prescribed
// sequence exactly.
Dialogue sample_recover_password_dialogue();

// A 2fa-reset conversation whose agent drifted off the labelled workflow
// (executes verify-identity/make-password instead of the prescribed steps).
Dialogue sample_mislabeled_reset_2fa_dialogue();

// Deterministic on-script dialogues covering every workflow.
std::vector<Dialogue> synthetic_dataset(const KnowledgeBase& kb, int dialogues_per_flow = 1);

// An off-script training-side dialogue that executes `instructions` inside a
// workflow whose prescribed sequence never contains it.
Dialogue synthetic_instructions_deviation_dialogue();

}  // namespace flowplan::fixtures
