#include "evocounsel/memory/plan.hpp"

#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/text.hpp"

namespace evocounsel::memory {

std::string_view display_name(TherapeuticStage stage) {
  switch (stage) {
    case TherapeuticStage::CaseConceptualization: return "Case Conceptualization";
    case TherapeuticStage::CoreIntervention: return "Core Intervention";
    case TherapeuticStage::ConsolidationAndPrevention: return "Consolidation and Prevention";
  }
  return "Case Conceptualization";
}

std::string_view enum_name(TherapeuticStage stage) {
  switch (stage) {
    case TherapeuticStage::CaseConceptualization: return "CaseConceptualization";
    case TherapeuticStage::CoreIntervention: return "CoreIntervention";
    case TherapeuticStage::ConsolidationAndPrevention: return "ConsolidationAndPrevention";
  }
  return "CaseConceptualization";
}

std::optional<TherapeuticStage> parse_stage(std::string_view text) {
  std::string squashed;
  for (const auto& tok : text::tokenize(text)) squashed += tok;
  for (auto stage : kAllStages) {
    std::string candidate;
    for (const auto& tok : text::tokenize(display_name(stage))) candidate += tok;
    if (squashed == candidate) return stage;
  }
  return std::nullopt;
}

std::vector<std::string> SessionPlan::validate(std::size_t max_objectives) const {
  std::vector<std::string> issues;
  if (objectives.empty()) issues.push_back("plan.objectives: must be non-empty");
  if (objectives.size() > max_objectives) {
    issues.push_back("plan.objectives: at most " + std::to_string(max_objectives) + " allowed, got " +
                     std::to_string(objectives.size()));
  }
  for (const auto& o : objectives) {
    if (text::trim(o).empty()) issues.push_back("plan.objectives: empty objective");
  }
  return issues;
}

nlohmann::json to_json(const SessionPlan& plan) {
  return {{"stage", display_name(plan.stage)}, {"objectives", plan.objectives}};
}

SessionPlan plan_from_json(const nlohmann::json& j) {
  auto stage = parse_stage(j.at("stage").get<std::string>());
  if (!stage) throw ParseError("unknown therapeutic stage '" + j.at("stage").get<std::string>() + "'");
  return SessionPlan{*stage, j.at("objectives").get<std::vector<std::string>>()};
}

}  // namespace evocounsel::memory
