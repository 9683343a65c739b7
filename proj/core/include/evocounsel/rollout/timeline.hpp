#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evocounsel/gateway/chat.hpp"
#include "evocounsel/memory/memory_state.hpp"
#include "evocounsel/memory/profile.hpp"
#include "evocounsel/rollout/candidate.hpp"
#include "evocounsel/skills/evolution.hpp"
#include "evocounsel/skills/similarity.hpp"
#include "evocounsel/skills/skill_tree.hpp"

namespace evocounsel::rollout {

struct AdvanceOptions {
  /// Memory ablation: memory is neither extracted nor updated.
  bool update_memory = true;
  /// Skill ablation: the tree is not evolved.
  bool evolve_skills = true;
  std::size_t summary_cap = memory::kDefaultSummaryCap;
  skills::ManageThresholds thresholds{};
  skills::ApplyOptions apply{};
  const skills::SimilarityMetric* metric = nullptr;  // token-set cosine when null
  gateway::TaskOptions extraction{};
  gateway::TaskOptions summary{};
  gateway::TaskOptions skill{};
};

struct AdvanceResult {
  memory::MemoryState memory;
  skills::SkillTree tree;
  std::optional<memory::ProfileDelta> delta;
  std::optional<memory::SessionSummary> summary;
  std::optional<skills::SkillUpdate> update;
  std::string updated_node;
  std::vector<std::string> warnings;
};

/// M_{t+1} and T_{t+1} from the winner alone. Losing candidates are not an
/// input, so they cannot leak into either. Errors are rethrown as Error with
/// the session id prepended.
AdvanceResult advance_timeline(gateway::Backend& extractor, const memory::MemoryState& memory,
                               const skills::SkillTree& tree, const SessionCandidate& winner,
                               const std::optional<std::string>& root_id, const AdvanceOptions& options = {});

}  // namespace evocounsel::rollout
