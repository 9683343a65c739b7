#include "evocounsel/skills/diff.hpp"

#include "evocounsel/common/errors.hpp"

namespace evocounsel::skills {

SkillDiff diff_report(const SkillTree& a, const SkillTree& b) {
  if (a.version > b.version) {
    throw PreconditionError("diff_report: version " + std::to_string(a.version) + " is newer than " +
                            std::to_string(b.version));
  }
  SkillDiff diff;
  diff.from_version = a.version;
  diff.to_version = b.version;
  for (auto level : {SkillLevel::Root, SkillLevel::Stage, SkillLevel::Meta, SkillLevel::Atomic}) {
    diff.counts[std::string(to_string(level))] = LevelCount{a.count(level), b.count(level)};
  }
  for (const auto& [id, node] : b.nodes) {
    const SkillNode* old = a.find(id);
    if (old == nullptr) {
      diff.appended.push_back(id);
      for (const auto& m : node.provenance.merges) {
        diff.merged_into_appended.push_back({id, m.draft_name, m.session_id, m.version});
      }
      continue;
    }
    const std::size_t known = old->provenance.merges.size();
    bool recorded = false;
    for (std::size_t i = known; i < node.provenance.merges.size(); ++i) {
      const auto& m = node.provenance.merges[i];
      diff.merged.push_back({id, m.draft_name, m.session_id, m.version});
      recorded = true;
    }
    if (!recorded && old->definition != node.definition) diff.merged.push_back({id, "", "", b.version});
  }
  return diff;
}

nlohmann::json to_json(const SkillDiff& diff) {
  auto entries = [](const std::vector<MergedEntry>& v) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& m : v) {
      out.push_back({{"ref_id", m.ref_id}, {"draft_name", m.draft_name}, {"session_id", m.session_id}, {"version", m.version}});
    }
    return out;
  };
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [level, c] : diff.counts) counts[level] = {{"before", c.before}, {"after", c.after}};
  return {{"from_version", diff.from_version},
          {"to_version", diff.to_version},
          {"appended", diff.appended},
          {"merged", entries(diff.merged)},
          {"merged_into_appended", entries(diff.merged_into_appended)},
          {"counts", std::move(counts)}};
}

std::string render_text(const SkillDiff& diff, const SkillTree& b) {
  std::string out = "skill tree diff v" + std::to_string(diff.from_version) + " -> v" + std::to_string(diff.to_version) + "\n";
  for (const auto& [level, c] : diff.counts) {
    out += "  " + level + ": " + std::to_string(c.before) + " -> " + std::to_string(c.after) + "\n";
  }
  out += "appended (" + std::to_string(diff.appended.size()) + "):\n";
  for (const auto& id : diff.appended) {
    const SkillNode* n = b.find(id);
    out += "  + " + id + (n ? " \"" + n->name + "\"" : std::string()) + "\n";
  }
  out += "merged (" + std::to_string(diff.merge_events()) + "):\n";
  for (const auto* list : {&diff.merged, &diff.merged_into_appended}) {
    for (const auto& m : *list) {
      out += "  ~ " + m.ref_id + " <- " + (m.draft_name.empty() ? std::string("(definition edited)") : "\"" + m.draft_name + "\"");
      if (!m.session_id.empty()) out += " from " + m.session_id;
      out += " @v" + std::to_string(m.version) + "\n";
    }
  }
  return out;
}

}  // namespace evocounsel::skills
