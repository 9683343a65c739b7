#pragma once

#include <span>
#include <string>
#include <vector>

#include "evocounsel/gateway/call_context.hpp"
#include "evocounsel/gateway/chat.hpp"
#include "evocounsel/memory/memory_state.hpp"
#include "evocounsel/memory/plan.hpp"
#include "evocounsel/memory/transcript.hpp"
#include "evocounsel/skills/skill_tree.hpp"

namespace evocounsel::memory {

/// Rendered generation context for one counselor turn.
struct PromptContext {
  std::vector<gateway::Message> messages;
  std::string user_message;
  std::string memory_digest;
  std::string plan_digest;
  std::string skill_digest;

  std::string digest() const;
};

/// `[PROFILE]`, `[SUMMARIES]` and `[MEMORY] <digest>` sections.
std::string render_memory(const MemoryState& memory);
/// `[PLAN]` section.
std::string render_plan(const SessionPlan& plan);
/// `[SKILL] <name>: <definition>` plus optional when-to-use / trigger lines.
std::string render_skill(const skills::AtomicSkill& skill);

/// Deterministic context: system section (memory, plan, skill directive),
/// then the session's dialogue so far, then the new client message.
PromptContext assemble_context(const std::string& user_message, const MemoryState& memory, const SessionPlan& plan,
                               const skills::AtomicSkill& skill, std::span<const Turn> history = {});

/// Jointly produces reasoning z_i and response r_i via structured output.
CounselorTurn generate_turn(gateway::Backend& backend, const PromptContext& context, const skills::AtomicSkill& skill,
                            const gateway::CallContext& call = {}, const gateway::TaskOptions& options = {});

struct PlanOptions {
  std::size_t max_objectives = 3;
  gateway::TaskOptions task{};
};

/// G_t from M_t. With empty memory the prompt states this is the first session.
SessionPlan reason_plan(gateway::Backend& backend, const MemoryState& memory, SessionIndex session_index,
                        const PlanOptions& options = {}, const gateway::CallContext& call = {});

/// Plan used when memory-augmented planning is ablated.
SessionPlan generic_plan();

/// Extract_attr(S_{t-1}): profile changes stated in the finished session.
ProfileDelta extract_attributes(gateway::Backend& backend, const SessionTranscript& transcript,
                                const ClientProfile& profile, const gateway::CallContext& call = {},
                                const gateway::TaskOptions& options = {});

/// h_{t-1}: summary of emotional shifts and intervention outcomes.
SessionSummary summarize_session(gateway::Backend& backend, const SessionTranscript& transcript,
                                 const gateway::CallContext& call = {}, const gateway::TaskOptions& options = {});

}  // namespace evocounsel::memory
