#include "evocounsel/memory/memory_state.hpp"

#include "evocounsel/common/digest.hpp"
#include "evocounsel/common/errors.hpp"

namespace evocounsel::memory {

nlohmann::json to_json(const SessionSummary& s) {
  return {{"session_index", s.session_index},
          {"emotional_shifts", s.emotional_shifts},
          {"intervention_outcomes", s.intervention_outcomes},
          {"key_events", s.key_events}};
}

SessionSummary summary_from_json(const nlohmann::json& j) {
  SessionSummary s;
  s.session_index = j.at("session_index").get<int>();
  s.emotional_shifts = j.value("emotional_shifts", "");
  s.intervention_outcomes = j.value("intervention_outcomes", "");
  if (j.contains("key_events")) s.key_events = j["key_events"].get<std::vector<std::string>>();
  return s;
}

MemoryState MemoryState::with_summary(SessionSummary summary, std::size_t cap) const {
  if (!summaries.empty() && summary.session_index != summaries.back().session_index + 1) {
    throw PreconditionError("summary for session " + std::to_string(summary.session_index) +
                            " does not follow session " + std::to_string(summaries.back().session_index));
  }
  MemoryState next = *this;
  next.summaries.push_back(std::move(summary));
  cap = std::max<std::size_t>(cap, 1);
  while (next.summaries.size() > cap) {
    const auto& old = next.summaries.front();
    std::string folded = "[Session " + std::to_string(old.session_index) + "] " + old.emotional_shifts;
    if (!old.intervention_outcomes.empty()) folded += " Outcomes: " + old.intervention_outcomes;
    if (!next.profile.free_text.empty()) next.profile.free_text += "\n";
    next.profile.free_text += folded;
    next.summaries.erase(next.summaries.begin());
  }
  return next;
}

std::vector<std::string> MemoryState::validate() const {
  std::vector<std::string> issues;
  for (std::size_t i = 1; i < summaries.size(); ++i) {
    if (summaries[i].session_index != summaries[i - 1].session_index + 1) {
      issues.push_back("summaries not consecutive at position " + std::to_string(i));
    }
  }
  if (!summaries.empty() && summaries.front().session_index < 1) issues.push_back("summary session_index < 1");
  return issues;
}

nlohmann::json MemoryState::to_json() const {
  nlohmann::json sums = nlohmann::json::array();
  for (const auto& s : summaries) sums.push_back(memory::to_json(s));
  return {{"schema_version", kMemorySchemaVersion}, {"profile", memory::to_json(profile)}, {"summaries", std::move(sums)}};
}

MemoryState MemoryState::from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != kMemorySchemaVersion) {
    throw ParseError("unsupported memory snapshot schema_version " + j.value("schema_version", nlohmann::json()).dump());
  }
  MemoryState m;
  m.profile = profile_from_json(j.at("profile"));
  for (const auto& s : j.at("summaries")) m.summaries.push_back(summary_from_json(s));
  return m;
}

std::string MemoryState::digest() const { return json_digest(to_json()); }

}  // namespace evocounsel::memory
