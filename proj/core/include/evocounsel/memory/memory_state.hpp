#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/memory/profile.hpp"

namespace evocounsel::memory {

/// h_t: structured summary of one finished session.
struct SessionSummary {
  SessionIndex session_index = 0;
  std::string emotional_shifts;
  std::string intervention_outcomes;
  std::vector<std::string> key_events;

  friend bool operator==(const SessionSummary&, const SessionSummary&) = default;
};

nlohmann::json to_json(const SessionSummary& summary);
SessionSummary summary_from_json(const nlohmann::json& j);

inline constexpr std::size_t kDefaultSummaryCap = 50;
inline constexpr int kMemorySchemaVersion = 1;

/// M_t = (profile, summaries). Immutable snapshot; updates return new values.
struct MemoryState {
  ClientProfile profile;
  std::vector<SessionSummary> summaries;

  friend bool operator==(const MemoryState&, const MemoryState&) = default;

  bool empty() const { return profile.attributes.empty() && profile.free_text.empty() && summaries.empty(); }

  /// Appends `summary` (H_t = H_{t-1} + h_{t-1}). When more than `cap`
  /// summaries would be kept, the oldest ones are folded into the profile
  /// narrative so the retained window stays consecutive.
  MemoryState with_summary(SessionSummary summary, std::size_t cap = kDefaultSummaryCap) const;

  /// Consecutive session indices ending at the latest summary.
  std::vector<std::string> validate() const;

  nlohmann::json to_json() const;
  static MemoryState from_json(const nlohmann::json& j);
  /// Content address: sha256 of the canonical JSON serialization.
  std::string digest() const;
};

}  // namespace evocounsel::memory
