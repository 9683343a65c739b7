#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace evocounsel::memory {

enum class TherapeuticStage { CaseConceptualization, CoreIntervention, ConsolidationAndPrevention };

inline constexpr TherapeuticStage kAllStages[] = {TherapeuticStage::CaseConceptualization,
                                                  TherapeuticStage::CoreIntervention,
                                                  TherapeuticStage::ConsolidationAndPrevention};

/// "Case Conceptualization", "Core Intervention", "Consolidation and Prevention".
std::string_view display_name(TherapeuticStage stage);
/// "CaseConceptualization", ...
std::string_view enum_name(TherapeuticStage stage);
/// Accepts display or enum spelling, ignoring case, spaces and punctuation.
std::optional<TherapeuticStage> parse_stage(std::string_view text);

struct SessionPlan {
  TherapeuticStage stage = TherapeuticStage::CaseConceptualization;
  std::vector<std::string> objectives;

  friend bool operator==(const SessionPlan&, const SessionPlan&) = default;

  std::vector<std::string> validate(std::size_t max_objectives) const;
};

nlohmann::json to_json(const SessionPlan& plan);
SessionPlan plan_from_json(const nlohmann::json& j);

}  // namespace evocounsel::memory
