#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/memory/plan.hpp"

namespace evocounsel::skills {

enum class SkillLevel { Root = 1, Stage = 2, Meta = 3, Atomic = 4 };

std::string_view to_string(SkillLevel level);
std::optional<SkillLevel> parse_level(std::string_view name);

enum class ProvenanceKind { Seed, Extracted, Merged };

std::string_view to_string(ProvenanceKind kind);
std::optional<ProvenanceKind> parse_provenance(std::string_view name);

/// One absorbed draft on a merged node.
struct MergeEvent {
  std::string session_id;
  std::string draft_name;
  int version = 0;

  friend bool operator==(const MergeEvent&, const MergeEvent&) = default;
};

struct Provenance {
  ProvenanceKind kind = ProvenanceKind::Seed;
  std::vector<std::string> sessions;
  std::vector<MergeEvent> merges;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct SkillNode {
  std::string id;
  SkillLevel level = SkillLevel::Atomic;
  std::string name;
  std::string definition;
  std::optional<std::string> when_to_use;
  std::optional<std::string> trigger;
  std::optional<std::string> parent_id;
  Provenance provenance;
  int version_created = 0;

  friend bool operator==(const SkillNode&, const SkillNode&) = default;
};

/// Flattened view of an atomic node used as a generation directive.
struct AtomicSkill {
  std::string id;
  std::string name;
  std::string definition;
  std::string when_to_use;
  std::string trigger;

  friend bool operator==(const AtomicSkill&, const AtomicSkill&) = default;
};

AtomicSkill to_atomic_skill(const SkillNode& node);

/// Four-level ontology Root -> Stage -> Meta -> Atomic. Immutable by
/// convention: updates go through apply_update and produce a new version.
struct SkillTree {
  int version = 0;
  std::map<std::string, SkillNode> nodes;

  friend bool operator==(const SkillTree&, const SkillTree&) = default;

  const SkillNode* find(std::string_view id) const;
  const SkillNode& at(std::string_view id) const;
  /// Direct children, ordered by id.
  std::vector<const SkillNode*> children(std::string_view id) const;
  std::vector<const SkillNode*> with_level(SkillLevel level) const;
  /// Atomic descendants of `id` (or `id` itself when it is atomic), ordered by id.
  std::vector<const SkillNode*> atomics_under(std::string_view id) const;
  /// Ancestor (or self) at `level`; nullptr if none.
  const SkillNode* ancestor(std::string_view id, SkillLevel level) const;
  /// Stage nodes for `stage`, optionally restricted to the root with id `root_id`.
  std::vector<const SkillNode*> stages(memory::TherapeuticStage stage,
                                       const std::optional<std::string>& root_id = std::nullopt) const;
  std::size_t count(SkillLevel level) const;
};

/// Every violated invariant, one message per offending node. Empty means valid.
std::vector<std::string> validate_tree(const SkillTree& tree);

nlohmann::json to_json(const SkillNode& node);
nlohmann::json to_json(const SkillTree& tree);
/// Throws ParseError naming the offending node on malformed input.
SkillTree tree_from_json(const nlohmann::json& j);

/// Throws ParseError (malformed) or ValidationError (invariants).
SkillTree load_tree(const std::filesystem::path& path);
/// Throws ValidationError if the tree is invalid.
void save_tree(const SkillTree& tree, const std::filesystem::path& path);
/// Exact bytes save_tree writes.
std::string serialize_tree(const SkillTree& tree);

/// Seed library shipped with the project (five schools).
std::filesystem::path default_seed_tree_path();

}  // namespace evocounsel::skills
