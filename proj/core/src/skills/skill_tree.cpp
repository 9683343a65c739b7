#include "evocounsel/skills/skill_tree.hpp"

#include <set>

#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/files.hpp"
#include "evocounsel/common/text.hpp"

namespace evocounsel::skills {

std::string_view to_string(SkillLevel level) {
  switch (level) {
    case SkillLevel::Root: return "Root";
    case SkillLevel::Stage: return "Stage";
    case SkillLevel::Meta: return "Meta";
    case SkillLevel::Atomic: return "Atomic";
  }
  return "Atomic";
}

std::optional<SkillLevel> parse_level(std::string_view name) {
  for (auto l : {SkillLevel::Root, SkillLevel::Stage, SkillLevel::Meta, SkillLevel::Atomic}) {
    if (text::iequals(name, to_string(l))) return l;
  }
  return std::nullopt;
}

std::string_view to_string(ProvenanceKind kind) {
  switch (kind) {
    case ProvenanceKind::Seed: return "seed";
    case ProvenanceKind::Extracted: return "extracted";
    case ProvenanceKind::Merged: return "merged";
  }
  return "seed";
}

std::optional<ProvenanceKind> parse_provenance(std::string_view name) {
  for (auto k : {ProvenanceKind::Seed, ProvenanceKind::Extracted, ProvenanceKind::Merged}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

AtomicSkill to_atomic_skill(const SkillNode& node) {
  return AtomicSkill{node.id, node.name, node.definition, node.when_to_use.value_or(""), node.trigger.value_or("")};
}

const SkillNode* SkillTree::find(std::string_view id) const {
  auto it = nodes.find(std::string(id));
  return it == nodes.end() ? nullptr : &it->second;
}

const SkillNode& SkillTree::at(std::string_view id) const {
  if (const auto* n = find(id)) return *n;
  throw PreconditionError("unknown skill node '" + std::string(id) + "'");
}

std::vector<const SkillNode*> SkillTree::children(std::string_view id) const {
  std::vector<const SkillNode*> out;
  for (const auto& [nid, node] : nodes) {
    if (node.parent_id && *node.parent_id == id) out.push_back(&node);
  }
  return out;
}

std::vector<const SkillNode*> SkillTree::with_level(SkillLevel level) const {
  std::vector<const SkillNode*> out;
  for (const auto& [id, node] : nodes) {
    if (node.level == level) out.push_back(&node);
  }
  return out;
}

const SkillNode* SkillTree::ancestor(std::string_view id, SkillLevel level) const {
  const SkillNode* cur = find(id);
  for (int guard = 0; cur != nullptr && guard < 8; ++guard) {
    if (cur->level == level) return cur;
    if (!cur->parent_id) return nullptr;
    cur = find(*cur->parent_id);
  }
  return nullptr;
}

std::vector<const SkillNode*> SkillTree::atomics_under(std::string_view id) const {
  std::vector<const SkillNode*> out;
  for (const auto& [nid, node] : nodes) {
    if (node.level != SkillLevel::Atomic) continue;
    const SkillNode* cur = &node;
    for (int guard = 0; cur != nullptr && guard < 8; ++guard) {
      if (cur->id == id) {
        out.push_back(&node);
        break;
      }
      cur = cur->parent_id ? find(*cur->parent_id) : nullptr;
    }
  }
  return out;
}

std::vector<const SkillNode*> SkillTree::stages(memory::TherapeuticStage stage,
                                                const std::optional<std::string>& root_id) const {
  std::vector<const SkillNode*> out;
  for (const auto* node : with_level(SkillLevel::Stage)) {
    if (memory::parse_stage(node->name) != stage) continue;
    if (root_id && node->parent_id != *root_id) continue;
    out.push_back(node);
  }
  return out;
}

std::size_t SkillTree::count(SkillLevel level) const {
  std::size_t n = 0;
  for (const auto& [id, node] : nodes) n += node.level == level ? 1 : 0;
  return n;
}

std::vector<std::string> validate_tree(const SkillTree& tree) {
  std::vector<std::string> issues;
  auto bad = [&](const SkillNode& n, const std::string& what) { issues.push_back("node '" + n.id + "': " + what); };

  std::map<std::string, std::set<std::string>> sibling_names;  // parent id ("" for roots) -> lowered names
  for (const auto& [id, node] : tree.nodes) {
    if (id != node.id) bad(node, "keyed under different id '" + id + "'");
    if (node.id.empty()) issues.push_back("node with empty id");
    if (text::trim(node.name).empty()) bad(node, "empty name");
    if (node.version_created > tree.version) bad(node, "version_created beyond tree version");

    bool level_skip = false;
    if (node.level == SkillLevel::Root) {
      if (node.parent_id) bad(node, "Root must not have a parent");
    } else if (!node.parent_id) {
      bad(node, std::string(to_string(node.level)) + " must have a parent");
    } else if (const SkillNode* parent = tree.find(*node.parent_id); parent == nullptr) {
      bad(node, "parent '" + *node.parent_id + "' does not exist");
    } else if (static_cast<int>(parent->level) != static_cast<int>(node.level) - 1) {
      level_skip = true;
      bad(node, std::string(to_string(node.level)) + " parent must be " +
                    std::string(to_string(static_cast<SkillLevel>(static_cast<int>(node.level) - 1))) + ", got " +
                    std::string(to_string(parent->level)));
    }
    if (node.level == SkillLevel::Stage && !memory::parse_stage(node.name)) {
      bad(node, "Stage name '" + node.name + "' is not a therapeutic stage");
    }

    // Walk to the root: detects cycles and measures depth.
    int depth = 1;
    const SkillNode* cur = &node;
    std::set<std::string> seen{node.id};
    bool cyclic = false;
    while (cur->parent_id) {
      const SkillNode* parent = tree.find(*cur->parent_id);
      if (parent == nullptr) break;
      if (!seen.insert(parent->id).second) {
        cyclic = true;
        break;
      }
      cur = parent;
      ++depth;
    }
    if (cyclic) bad(node, "cycle in parent chain");
    // a bad parent level already explains a depth mismatch
    else if (!level_skip && cur->level == SkillLevel::Root && depth != static_cast<int>(node.level)) {
      bad(node, "depth " + std::to_string(depth) + " from root does not match level " + std::string(to_string(node.level)));
    }

    const std::string key = text::to_lower(text::trim(node.name));
    if (!sibling_names[node.parent_id.value_or("")].insert(key).second) {
      bad(node, "duplicate sibling name '" + node.name + "'");
    }
  }
  return issues;
}

nlohmann::json to_json(const SkillNode& n) {
  nlohmann::json merges = nlohmann::json::array();
  for (const auto& m : n.provenance.merges) {
    merges.push_back({{"session_id", m.session_id}, {"draft_name", m.draft_name}, {"version", m.version}});
  }
  nlohmann::json j = {{"id", n.id},
                      {"level", to_string(n.level)},
                      {"name", n.name},
                      {"definition", n.definition},
                      {"provenance", {{"kind", to_string(n.provenance.kind)},
                                      {"sessions", n.provenance.sessions},
                                      {"merges", std::move(merges)}}},
                      {"version_created", n.version_created}};
  if (n.parent_id) j["parent_id"] = *n.parent_id;
  if (n.when_to_use) j["when_to_use"] = *n.when_to_use;
  if (n.trigger) j["trigger"] = *n.trigger;
  return j;
}

nlohmann::json to_json(const SkillTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& [id, node] : tree.nodes) nodes.push_back(to_json(node));
  return {{"version", tree.version}, {"nodes", std::move(nodes)}};
}

namespace {

SkillNode node_from_json(const nlohmann::json& j, std::size_t index) {
  const std::string where = j.is_object() && j.contains("id") && j["id"].is_string()
                                ? "node '" + j["id"].get<std::string>() + "'"
                                : "node #" + std::to_string(index);
  try {
    SkillNode n;
    n.id = j.at("id").get<std::string>();
    const auto level = parse_level(j.at("level").get<std::string>());
    if (!level) throw ParseError(where + ": unknown level '" + j["level"].get<std::string>() + "'");
    n.level = *level;
    n.name = j.at("name").get<std::string>();
    n.definition = j.value("definition", "");
    if (j.contains("when_to_use") && !j["when_to_use"].is_null()) n.when_to_use = j["when_to_use"].get<std::string>();
    if (j.contains("trigger") && !j["trigger"].is_null()) n.trigger = j["trigger"].get<std::string>();
    if (j.contains("parent_id") && !j["parent_id"].is_null()) n.parent_id = j["parent_id"].get<std::string>();
    n.version_created = j.value("version_created", 0);
    if (j.contains("provenance")) {
      const auto& p = j["provenance"];
      const auto kind = parse_provenance(p.value("kind", "seed"));
      if (!kind) throw ParseError(where + ": unknown provenance kind");
      n.provenance.kind = *kind;
      if (p.contains("sessions")) n.provenance.sessions = p["sessions"].get<std::vector<std::string>>();
      if (p.contains("merges")) {
        for (const auto& m : p["merges"]) {
          n.provenance.merges.push_back(
              {m.at("session_id").get<std::string>(), m.at("draft_name").get<std::string>(), m.at("version").get<int>()});
        }
      }
    }
    return n;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

}  // namespace

SkillTree tree_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array()) {
    throw ParseError("skill tree: expected {version, nodes:[...]}");
  }
  SkillTree tree;
  tree.version = j.value("version", 0);
  std::size_t index = 0;
  for (const auto& nj : j["nodes"]) {
    SkillNode node = node_from_json(nj, index++);
    const std::string id = node.id;
    if (!tree.nodes.emplace(id, std::move(node)).second) throw ParseError("node '" + id + "': duplicate id");
  }
  return tree;
}

SkillTree load_tree(const std::filesystem::path& path) {
  SkillTree tree = tree_from_json(files::read_json(path));
  if (auto issues = validate_tree(tree); !issues.empty()) throw ValidationError(std::move(issues));
  return tree;
}

std::string serialize_tree(const SkillTree& tree) { return to_json(tree).dump(2) + "\n"; }

void save_tree(const SkillTree& tree, const std::filesystem::path& path) {
  if (auto issues = validate_tree(tree); !issues.empty()) throw ValidationError(std::move(issues));
  files::write_text(path, serialize_tree(tree));
}

std::filesystem::path default_seed_tree_path() {
  return std::filesystem::path(EVOCOUNSEL_DATA_DIR) / "seed_tree.json";
}

}  // namespace evocounsel::skills
