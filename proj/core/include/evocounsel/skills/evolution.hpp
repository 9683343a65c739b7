#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/gateway/call_context.hpp"
#include "evocounsel/gateway/chat.hpp"
#include "evocounsel/memory/plan.hpp"
#include "evocounsel/memory/transcript.hpp"
#include "evocounsel/skills/similarity.hpp"
#include "evocounsel/skills/skill_tree.hpp"

namespace evocounsel::skills {

/// κ_atom: a candidate atomic skill abstracted from a winning session.
struct AtomicSkillDraft {
  std::string name;
  std::string definition;
  std::string when_to_use;
  std::string trigger;
  std::string target_meta_id;
  std::string source_session_id;

  friend bool operator==(const AtomicSkillDraft&, const AtomicSkillDraft&) = default;
};

nlohmann::json to_json(const AtomicSkillDraft& draft);
AtomicSkillDraft draft_from_json(const nlohmann::json& j);

/// Metas under the goal's stage (within `root_id` when it exists); all Metas
/// when that stage has none. Ordered by id.
std::vector<const SkillNode*> meta_candidates(const SkillTree& tree, memory::TherapeuticStage stage,
                                              const std::optional<std::string>& root_id);

/// Two-step targeted extraction: pick the Meta most aligned with the goal,
/// then abstract one Atomic draft instantiating it from the session.
AtomicSkillDraft extract_skill(gateway::Backend& backend, const memory::SessionTranscript& winning_session,
                               const SkillTree& tree, const memory::SessionPlan& goal,
                               const std::string& source_session_id,
                               const std::optional<std::string>& root_id = std::nullopt,
                               const gateway::CallContext& call = {}, const gateway::TaskOptions& options = {});

/// κ_ref and its similarity, or the "no reference" sentinel (ref empty).
struct NearestSkill {
  std::optional<AtomicSkill> ref;
  double similarity = 0.0;

  bool is_sentinel() const { return !ref.has_value(); }
};

/// Text compared for similarity: name + definition.
std::string similarity_text(std::string_view name, std::string_view definition);

/// Most similar Atomic among the draft's target Meta children; ties go to the
/// lexicographically smallest id.
NearestSkill nearest_skill(const SkillTree& tree, const AtomicSkillDraft& draft,
                           const SimilarityMetric& metric = TokenSetCosine{});

enum class UpdateAction { Append, Merge };

std::string_view to_string(UpdateAction action);

struct SkillUpdate {
  UpdateAction action = UpdateAction::Append;
  AtomicSkillDraft draft;
  std::optional<std::string> ref_id;
  std::optional<std::string> merged_definition;
  /// How the decision was reached: "sentinel", "below_low", "above_high", "model".
  std::string decided_by;
  double similarity = 0.0;

  friend bool operator==(const SkillUpdate&, const SkillUpdate&) = default;

  std::vector<std::string> validate() const;
  nlohmann::json to_json() const;
  static SkillUpdate from_json(const nlohmann::json& j);
};

struct ManageThresholds {
  double low = 0.30;
  double high = 0.90;
};

/// π_mgmt. Sentinel or similarity < low: Append without a backend call.
/// Similarity > high: Merge with a backend-written definition. Otherwise the
/// backend decides given both texts.
SkillUpdate manage_skill(gateway::Backend& backend, const AtomicSkillDraft& draft, const NearestSkill& nearest,
                         const ManageThresholds& thresholds = {}, const gateway::CallContext& call = {},
                         const gateway::TaskOptions& options = {});

struct ApplyOptions {
  /// On a sibling name collision: rename with a numeric suffix (and warn) or throw CollisionError.
  bool auto_suffix = true;
};

struct ApplyResult {
  SkillTree tree;
  std::string node_id;  // appended or merged node
  std::vector<std::string> warnings;
};

/// Append adds one Atomic under the target Meta; Merge rewrites the ref's
/// definition. Either way the version increases by exactly one and every other
/// node is untouched.
ApplyResult apply_update(const SkillTree& tree, const SkillUpdate& update, const ApplyOptions& options = {});

}  // namespace evocounsel::skills
