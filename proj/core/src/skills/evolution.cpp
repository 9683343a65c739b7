#include "evocounsel/skills/evolution.hpp"

#include <algorithm>
#include <set>

#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/text.hpp"
#include "evocounsel/gateway/structured.hpp"
#include "evocounsel/memory/context.hpp"

namespace evocounsel::skills {

using gateway::FieldKind;
using gateway::Role;

nlohmann::json to_json(const AtomicSkillDraft& d) {
  return {{"name", d.name},
          {"definition", d.definition},
          {"when_to_use", d.when_to_use},
          {"trigger", d.trigger},
          {"target_meta_id", d.target_meta_id},
          {"source_session_id", d.source_session_id}};
}

AtomicSkillDraft draft_from_json(const nlohmann::json& j) {
  return AtomicSkillDraft{j.at("name").get<std::string>(),         j.at("definition").get<std::string>(),
                          j.value("when_to_use", ""),              j.value("trigger", ""),
                          j.at("target_meta_id").get<std::string>(), j.value("source_session_id", "")};
}

std::vector<const SkillNode*> meta_candidates(const SkillTree& tree, memory::TherapeuticStage stage,
                                              const std::optional<std::string>& root_id) {
  std::optional<std::string> root;
  if (root_id && tree.find(*root_id) != nullptr) root = root_id;
  std::vector<const SkillNode*> out;
  for (const auto* s : tree.stages(stage, root)) {
    auto metas = tree.children(s->id);
    out.insert(out.end(), metas.begin(), metas.end());
  }
  if (out.empty()) out = tree.with_level(SkillLevel::Meta);
  std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
  return out;
}

AtomicSkillDraft extract_skill(gateway::Backend& backend, const memory::SessionTranscript& winning_session,
                               const SkillTree& tree, const memory::SessionPlan& goal,
                               const std::string& source_session_id, const std::optional<std::string>& root_id,
                               const gateway::CallContext& call, const gateway::TaskOptions& options) {
  if (winning_session.counselor_turns() == 0) {
    throw PreconditionError("extract_skill: session " + source_session_id + " has no counselor turns");
  }
  if (auto issues = winning_session.validate(); !issues.empty()) {
    throw PreconditionError("extract_skill: session " + source_session_id + " incomplete: " + issues.front());
  }
  const auto metas = meta_candidates(tree, goal.stage, root_id);
  if (metas.empty()) throw PreconditionError("extract_skill: skill tree has no Meta skills");

  // (a) Meta selection anchored on the session goal.
  const SkillNode* meta = metas.front();
  if (metas.size() > 1) {
    std::set<std::string> ids;
    std::string listing;
    for (const auto* m : metas) {
      ids.insert(m->id);
      listing += "- " + m->id + ": " + m->name + " - " + m->definition + "\n";
    }
    static const gateway::OutputSchema schema{"meta_choice", {{"meta_id", FieldKind::String, true}}};
    std::string user = memory::render_plan(goal) + "Meta skills:\n" + listing +
                       "Which meta skill is most aligned with this session's therapeutic goal?\n" +
                       gateway::format_instruction(schema);
    gateway::StructuredOptions so;
    so.max_repairs = options.max_repairs;
    so.check = [&](const nlohmann::json& v) -> std::optional<std::string> {
      if (ids.count(v["meta_id"].get<std::string>()) == 0) return "meta_id is not one of the listed meta skills";
      return std::nullopt;
    };
    try {
      const auto value = gateway::complete_structured(
          backend,
          call.request("skill_meta_selection",
                       {{Role::System, "You organize counseling skills in a hierarchical library."},
                        {Role::User, std::move(user)}},
                       options),
          schema, so);
      meta = &tree.at(value["meta_id"].get<std::string>());
    } catch (const StructuredOutputError& e) {
      throw ExtractionError(std::string("extract_skill: ") + e.what());
    }
  }

  // (b) Abstraction of one atomic skill instantiating the chosen meta skill.
  static const gateway::OutputSchema draft_schema{"atomic_skill_draft",
                                                  {{"name", FieldKind::String, true},
                                                   {"definition", FieldKind::String, true},
                                                   {"when_to_use", FieldKind::String, false},
                                                   {"trigger", FieldKind::String, false}}};
  std::string existing;
  for (const auto* a : tree.children(meta->id)) existing += "- " + a->name + ": " + a->definition + "\n";
  std::string user = memory::render_plan(goal) + "Meta skill: " + meta->name + " - " + meta->definition +
                     "\nExisting atomic skills under it:\n" + (existing.empty() ? "(none)\n" : existing) +
                     "\nHigh-reward session transcript:\n" + winning_session.render_dialogue() +
                     "\nAbstract one concrete, executable atomic skill demonstrated in this session that "
                     "instantiates the meta skill.\n" +
                     gateway::format_instruction(draft_schema);
  gateway::StructuredOptions so;
  so.max_repairs = options.max_repairs;
  so.check = [](const nlohmann::json& v) -> std::optional<std::string> {
    if (text::trim(v["name"].get<std::string>()).empty()) return "name must be non-empty";
    if (text::trim(v["definition"].get<std::string>()).empty()) return "definition must be non-empty";
    return std::nullopt;
  };
  nlohmann::json value;
  try {
    value = gateway::complete_structured(
        backend,
        call.request("skill_extraction",
                     {{Role::System, "You distill practice-grounded counseling skills from successful sessions."},
                      {Role::User, std::move(user)}},
                     options),
        draft_schema, so);
  } catch (const StructuredOutputError& e) {
    throw ExtractionError(std::string("extract_skill: ") + e.what());
  }
  return AtomicSkillDraft{text::trim(value["name"].get<std::string>()),
                          value["definition"].get<std::string>(),
                          value.value("when_to_use", ""),
                          value.value("trigger", ""),
                          meta->id,
                          source_session_id};
}

std::string similarity_text(std::string_view name, std::string_view definition) {
  return std::string(name) + " " + std::string(definition);
}

NearestSkill nearest_skill(const SkillTree& tree, const AtomicSkillDraft& draft, const SimilarityMetric& metric) {
  NearestSkill best;
  const SkillNode* meta = tree.find(draft.target_meta_id);
  if (meta == nullptr || meta->level != SkillLevel::Meta) return best;
  const std::string draft_text = similarity_text(draft.name, draft.definition);
  for (const auto* child : tree.children(meta->id)) {  // ordered by id, so ">" keeps the smallest id on ties
    if (child->level != SkillLevel::Atomic) continue;
    const double sim = metric.similarity(draft_text, similarity_text(child->name, child->definition));
    if (best.is_sentinel() || sim > best.similarity) {
      best.ref = to_atomic_skill(*child);
      best.similarity = sim;
    }
  }
  return best;
}

std::string_view to_string(UpdateAction action) { return action == UpdateAction::Append ? "Append" : "Merge"; }

std::vector<std::string> SkillUpdate::validate() const {
  std::vector<std::string> issues;
  if (action == UpdateAction::Merge) {
    if (!ref_id || ref_id->empty()) issues.push_back("Merge requires ref_id");
    if (!merged_definition || text::trim(*merged_definition).empty()) issues.push_back("Merge requires merged_definition");
  }
  if (text::trim(draft.name).empty()) issues.push_back("draft name must be non-empty");
  if (draft.target_meta_id.empty()) issues.push_back("draft target_meta_id must be set");
  return issues;
}

nlohmann::json SkillUpdate::to_json() const {
  nlohmann::json j = {{"action", skills::to_string(action)},
                      {"draft", skills::to_json(draft)},
                      {"decided_by", decided_by},
                      {"similarity", similarity}};
  j["ref_id"] = ref_id ? nlohmann::json(*ref_id) : nlohmann::json(nullptr);
  j["merged_definition"] = merged_definition ? nlohmann::json(*merged_definition) : nlohmann::json(nullptr);
  return j;
}

SkillUpdate SkillUpdate::from_json(const nlohmann::json& j) {
  SkillUpdate u;
  const auto action = j.at("action").get<std::string>();
  if (action == "Append") u.action = UpdateAction::Append;
  else if (action == "Merge") u.action = UpdateAction::Merge;
  else throw ParseError("unknown skill update action '" + action + "'");
  u.draft = draft_from_json(j.at("draft"));
  if (j.contains("ref_id") && !j["ref_id"].is_null()) u.ref_id = j["ref_id"].get<std::string>();
  if (j.contains("merged_definition") && !j["merged_definition"].is_null()) {
    u.merged_definition = j["merged_definition"].get<std::string>();
  }
  u.decided_by = j.value("decided_by", "");
  u.similarity = j.value("similarity", 0.0);
  return u;
}

SkillUpdate manage_skill(gateway::Backend& backend, const AtomicSkillDraft& draft, const NearestSkill& nearest,
                         const ManageThresholds& thresholds, const gateway::CallContext& call,
                         const gateway::TaskOptions& options) {
  SkillUpdate update;
  update.draft = draft;
  update.similarity = nearest.similarity;
  if (nearest.is_sentinel()) {
    update.action = UpdateAction::Append;
    update.decided_by = "sentinel";
    return update;
  }
  if (nearest.similarity < thresholds.low) {
    update.action = UpdateAction::Append;
    update.decided_by = "below_low";
    return update;
  }

  const auto& ref = *nearest.ref;
  const std::string both = "Existing skill (" + ref.id + "): " + ref.name + " - " + ref.definition +
                           "\nNew skill: " + draft.name + " - " + draft.definition +
                           (draft.when_to_use.empty() ? "" : "\nNew skill when to use: " + draft.when_to_use) + "\n";
  const std::vector<gateway::Message> system = {
      {Role::System, "You curate a library of counseling skills, avoiding redundancy while refining definitions."}};

  try {
    if (nearest.similarity > thresholds.high) {
      static const gateway::OutputSchema schema{"merged_skill", {{"merged_definition", FieldKind::String, true}}};
      auto msgs = system;
      msgs.push_back({Role::User, both + "The new skill duplicates the existing one. Write one merged definition "
                                         "that keeps the existing skill's meaning and adds what the new skill "
                                         "contributes.\n" + gateway::format_instruction(schema)});
      gateway::StructuredOptions so;
      so.max_repairs = options.max_repairs;
      so.check = [](const nlohmann::json& v) -> std::optional<std::string> {
        if (text::trim(v["merged_definition"].get<std::string>()).empty()) return "merged_definition must be non-empty";
        return std::nullopt;
      };
      const auto value = gateway::complete_structured(backend, call.request("skill_merge", msgs, options), schema, so);
      update.action = UpdateAction::Merge;
      update.ref_id = ref.id;
      update.merged_definition = value["merged_definition"].get<std::string>();
      update.decided_by = "above_high";
      return update;
    }

    static const gateway::OutputSchema schema{
        "skill_management",
        {{"decision", FieldKind::String, true}, {"merged_definition", FieldKind::String, false}}};
    auto msgs = system;
    msgs.push_back({Role::User, both + "Decide whether to Append the new skill as a distinct node or Merge it "
                                       "into the existing skill. For Merge, also give merged_definition.\n" +
                                       gateway::format_instruction(schema)});
    gateway::StructuredOptions so;
    so.max_repairs = options.max_repairs;
    so.check = [](const nlohmann::json& v) -> std::optional<std::string> {
      const auto d = v["decision"].get<std::string>();
      if (text::iequals(d, "append")) return std::nullopt;
      if (text::iequals(d, "merge")) {
        if (!v.contains("merged_definition") || !v["merged_definition"].is_string() ||
            text::trim(v["merged_definition"].get<std::string>()).empty()) {
          return "Merge requires a non-empty merged_definition";
        }
        return std::nullopt;
      }
      return "decision must be Append or Merge, got '" + d + "'";
    };
    const auto value = gateway::complete_structured(backend, call.request("skill_management", msgs, options), schema, so);
    update.decided_by = "model";
    if (text::iequals(value["decision"].get<std::string>(), "merge")) {
      update.action = UpdateAction::Merge;
      update.ref_id = ref.id;
      update.merged_definition = value["merged_definition"].get<std::string>();
    } else {
      update.action = UpdateAction::Append;
    }
    return update;
  } catch (const StructuredOutputError& e) {
    throw ManagementError(std::string("manage_skill: ") + e.what());
  }
}

ApplyResult apply_update(const SkillTree& tree, const SkillUpdate& update, const ApplyOptions& options) {
  if (auto issues = update.validate(); !issues.empty()) throw ValidationError(std::move(issues));
  ApplyResult result{tree, {}, {}};
  SkillTree& next = result.tree;
  next.version = tree.version + 1;

  if (update.action == UpdateAction::Merge) {
    auto it = next.nodes.find(*update.ref_id);
    if (it == next.nodes.end() || it->second.level != SkillLevel::Atomic) {
      throw PreconditionError("apply_update: merge ref '" + *update.ref_id + "' is not an Atomic skill");
    }
    SkillNode& ref = it->second;
    ref.definition = *update.merged_definition;
    ref.provenance.kind = ProvenanceKind::Merged;
    const auto& sid = update.draft.source_session_id;
    if (!sid.empty() && std::find(ref.provenance.sessions.begin(), ref.provenance.sessions.end(), sid) ==
                            ref.provenance.sessions.end()) {
      ref.provenance.sessions.push_back(sid);
    }
    ref.provenance.merges.push_back({sid, update.draft.name, next.version});
    if (!ref.when_to_use && !update.draft.when_to_use.empty()) ref.when_to_use = update.draft.when_to_use;
    result.node_id = ref.id;
    return result;
  }

  const SkillNode* meta = tree.find(update.draft.target_meta_id);
  if (meta == nullptr || meta->level != SkillLevel::Meta) {
    throw PreconditionError("apply_update: target '" + update.draft.target_meta_id + "' is not a Meta skill");
  }
  std::set<std::string> sibling_names;
  for (const auto* c : tree.children(meta->id)) sibling_names.insert(text::to_lower(text::trim(c->name)));

  std::string name = text::trim(update.draft.name);
  if (sibling_names.count(text::to_lower(name)) != 0) {
    if (!options.auto_suffix) {
      throw CollisionError("apply_update: '" + name + "' already exists under " + meta->id);
    }
    int n = 2;
    std::string candidate;
    do {
      candidate = name + " (" + std::to_string(n++) + ")";
    } while (sibling_names.count(text::to_lower(candidate)) != 0);
    result.warnings.push_back("name collision under " + meta->id + ": '" + name + "' renamed to '" + candidate + "'");
    name = candidate;
  }

  std::string slug = text::lower_snake(name);
  if (slug.empty()) slug = "skill";
  std::string id = meta->id + "." + slug;
  for (int n = 2; next.find(id) != nullptr; ++n) id = meta->id + "." + slug + "_" + std::to_string(n);

  SkillNode node;
  node.id = id;
  node.level = SkillLevel::Atomic;
  node.name = name;
  node.definition = update.draft.definition;
  if (!update.draft.when_to_use.empty()) node.when_to_use = update.draft.when_to_use;
  if (!update.draft.trigger.empty()) node.trigger = update.draft.trigger;
  node.parent_id = meta->id;
  node.provenance.kind = ProvenanceKind::Extracted;
  if (!update.draft.source_session_id.empty()) node.provenance.sessions.push_back(update.draft.source_session_id);
  node.version_created = next.version;
  next.nodes.emplace(id, std::move(node));
  result.node_id = id;
  return result;
}

}  // namespace evocounsel::skills
