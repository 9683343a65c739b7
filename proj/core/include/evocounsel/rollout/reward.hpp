#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/client/judge.hpp"
#include "evocounsel/gateway/call_context.hpp"
#include "evocounsel/memory/transcript.hpp"

namespace evocounsel::rollout {

/// R(S): per-dimension judge scores, normalized weights and the weighted aggregate.
struct RewardReport {
  std::map<std::string, double> dimension_scores;
  std::map<std::string, double> weights;
  double aggregate = 0.0;
  std::vector<std::string> clamp_events;

  friend bool operator==(const RewardReport&, const RewardReport&) = default;

  /// Σ weight_d * score_d, recomputed from the stored maps.
  double recompute() const;
  std::vector<std::string> validate() const;

  nlohmann::json to_json() const;
  static RewardReport from_json(const nlohmann::json& j);
};

/// Builds a report from raw scores. Weights are rescaled to sum to 1; a
/// dimension without a score is a PreconditionError.
RewardReport make_reward(const std::map<std::string, double>& scores, const std::map<std::string, double>& weights);

/// Judges a finished transcript against `rubric`. ScoringError when the judge
/// output cannot be parsed after repairs.
RewardReport score_session(gateway::Backend& judge, const memory::SessionTranscript& transcript,
                           const client::Rubric& rubric, const gateway::CallContext& call = {},
                           const client::JudgeOptions& options = {});

}  // namespace evocounsel::rollout
