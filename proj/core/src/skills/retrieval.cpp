#include "evocounsel/skills/retrieval.hpp"

#include <algorithm>
#include <set>

#include "evocounsel/common/errors.hpp"
#include "evocounsel/gateway/structured.hpp"
#include "evocounsel/memory/context.hpp"

namespace evocounsel::skills {

std::vector<const SkillNode*> retrieval_candidates(const SkillTree& tree, memory::TherapeuticStage stage,
                                                   const std::optional<std::string>& root_id) {
  std::optional<std::string> root;
  if (root_id && tree.find(*root_id) != nullptr) root = root_id;
  std::vector<const SkillNode*> out;
  for (const auto* s : tree.stages(stage, root)) {
    auto atomics = tree.atomics_under(s->id);
    out.insert(out.end(), atomics.begin(), atomics.end());
  }
  if (out.empty()) out = tree.with_level(SkillLevel::Atomic);
  std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
  return out;
}

AtomicSkill retrieve_skill(gateway::Backend& backend, const SkillTree& tree, const DialogueState& state,
                           const gateway::CallContext& call, const gateway::TaskOptions& options) {
  const auto candidates = retrieval_candidates(tree, state.plan.stage, state.root_id);
  if (candidates.empty()) throw PreconditionError("retrieve_skill: skill tree has no Atomic skills");
  if (candidates.size() == 1) return to_atomic_skill(*candidates.front());

  std::set<std::string> ids;
  std::string listing;
  for (const auto* c : candidates) {
    ids.insert(c->id);
    listing += "- " + c->id + ": " + c->name + " - " + c->definition;
    if (c->when_to_use) listing += " (when to use: " + *c->when_to_use + ")";
    listing += "\n";
  }
  static const gateway::OutputSchema schema{"skill_choice", {{"skill_id", gateway::FieldKind::String, true}}};
  std::string user = memory::render_memory(state.memory) + memory::render_plan(state.plan) +
                     "Client just said: " + std::string(state.user_message) +
                     "\n\nCandidate atomic skills:\n" + listing +
                     "Pick the single skill that best serves the next counselor turn. Answer with its id.\n" +
                     gateway::format_instruction(schema);

  gateway::StructuredOptions so;
  so.max_repairs = options.max_repairs;
  so.check = [&](const nlohmann::json& v) -> std::optional<std::string> {
    const auto id = v["skill_id"].get<std::string>();
    if (ids.count(id) == 0) return "skill_id '" + id + "' is not one of the listed candidates";
    return std::nullopt;
  };
  try {
    const auto value = gateway::complete_structured(
        backend,
        call.request("skill_retrieval",
                     {{gateway::Role::System, "You choose counseling intervention skills from a fixed catalogue."},
                      {gateway::Role::User, std::move(user)}},
                     options),
        schema, so);
    return to_atomic_skill(tree.at(value["skill_id"].get<std::string>()));
  } catch (const StructuredOutputError& e) {
    throw RetrievalError(std::string("retrieve_skill: ") + e.what());
  }
}

}  // namespace evocounsel::skills
