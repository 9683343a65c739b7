#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evocounsel/gateway/call_context.hpp"
#include "evocounsel/gateway/chat.hpp"
#include "evocounsel/memory/memory_state.hpp"
#include "evocounsel/memory/plan.hpp"
#include "evocounsel/skills/skill_tree.hpp"

namespace evocounsel::skills {

/// s_t = (u_i, M_t, G_t), plus the root (therapy school) the client is served under.
struct DialogueState {
  std::string_view user_message;
  const memory::MemoryState& memory;
  const memory::SessionPlan& plan;
  std::optional<std::string> root_id;
};

/// Atomics under the Stage matching `stage` (within `root_id` when that root
/// exists), or every Atomic in the tree when that stage has none. Ordered by id.
std::vector<const SkillNode*> retrieval_candidates(const SkillTree& tree, memory::TherapeuticStage stage,
                                                   const std::optional<std::string>& root_id);

/// Enumerated-choice selection of κ*. A single candidate is returned without a
/// backend call. Throws PreconditionError on a tree without Atomics and
/// RetrievalError when the backend never names a listed id.
AtomicSkill retrieve_skill(gateway::Backend& backend, const SkillTree& tree, const DialogueState& state,
                           const gateway::CallContext& call = {}, const gateway::TaskOptions& options = {});

}  // namespace evocounsel::skills
