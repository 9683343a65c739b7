#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evocounsel/client/card.hpp"
#include "evocounsel/client/judge.hpp"
#include "evocounsel/gateway/chat.hpp"
#include "evocounsel/memory/context.hpp"
#include "evocounsel/memory/memory_state.hpp"
#include "evocounsel/rollout/candidate.hpp"
#include "evocounsel/skills/skill_tree.hpp"

namespace evocounsel::rollout {

struct RolloutOptions {
  int n = 8;
  std::uint64_t base_seed = 0;
  int turn_limit = 20;
  /// Worker threads for candidates; 1 runs them in order on the caller's thread.
  int parallelism = 1;
  memory::PlanOptions plan{};
  gateway::TaskOptions retrieval{};
  gateway::TaskOptions generation{};
  gateway::TaskOptions client{};
  /// Ablation: fixed generic plan instead of plan reasoning.
  bool fixed_plan = false;
  /// Ablation: one skill for every turn instead of retrieval.
  std::optional<skills::AtomicSkill> fixed_skill;
};

/// Counselor-side and client-side backends of a rollout.
struct RolloutBackends {
  gateway::Backend& counselor;
  gateway::Backend& client;
};

/// Plays one candidate to completion: plan once, then
/// {client turn -> retrieve skill -> generate counselor turn} until the client
/// signals the end (the counselor still answers that turn) or `turn_limit`
/// exchanges are done. Errors propagate.
SessionCandidate play_candidate(const RolloutBackends& backends, const memory::MemoryState& memory,
                                const skills::SkillTree& tree, const client::ClientProfileCard& card,
                                int session_index, int candidate_index, const RolloutOptions& options);

/// n candidates from identical frozen snapshots; candidate k uses base_seed + k.
/// A candidate whose backend calls fail is returned with failed = true.
/// Throws Error when every candidate fails.
std::vector<SessionCandidate> rollout_session(const RolloutBackends& backends, const memory::MemoryState& memory,
                                              const skills::SkillTree& tree, const client::ClientProfileCard& card,
                                              int session_index, const RolloutOptions& options);

/// Labels for calls made on behalf of a candidate: scope "t001/c02", session, candidate.
gateway::CallContext candidate_call(int session_index, int candidate_index, std::uint64_t seed);

/// Runs `fn(i)` for i in [0, count) on up to `parallelism` threads.
/// Exceptions from `fn` must be handled inside it.
void parallel_for(int count, int parallelism, const std::function<void(int)>& fn);

}  // namespace evocounsel::rollout
