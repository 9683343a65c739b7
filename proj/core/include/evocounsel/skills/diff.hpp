#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/skills/skill_tree.hpp"

namespace evocounsel::skills {

struct MergedEntry {
  std::string ref_id;
  std::string draft_name;  // empty when the definition changed outside a recorded merge
  std::string session_id;
  int version = 0;

  friend bool operator==(const MergedEntry&, const MergedEntry&) = default;
};

struct LevelCount {
  std::size_t before = 0;
  std::size_t after = 0;
};

/// Mechanical difference between two versions of a skill tree.
struct SkillDiff {
  int from_version = 0;
  int to_version = 0;
  /// Nodes present in the newer tree only.
  std::vector<std::string> appended;
  /// Merge events on nodes that already existed in the older tree.
  std::vector<MergedEntry> merged;
  /// Merge events on nodes that were themselves appended within the range.
  std::vector<MergedEntry> merged_into_appended;
  std::map<std::string, LevelCount> counts;

  bool empty() const { return appended.empty() && merged.empty() && merged_into_appended.empty(); }
  std::size_t merge_events() const { return merged.size() + merged_into_appended.size(); }
};

/// Requires a.version <= b.version (PreconditionError otherwise).
SkillDiff diff_report(const SkillTree& a, const SkillTree& b);

nlohmann::json to_json(const SkillDiff& diff);
std::string render_text(const SkillDiff& diff, const SkillTree& b);

}  // namespace evocounsel::skills
