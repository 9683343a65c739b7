#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/memory/transcript.hpp"
#include "evocounsel/rollout/reward.hpp"

namespace evocounsel::rollout {

/// "t001-c002"
std::string candidate_id(int session_index, int candidate_index);

/// S_t^(k): one rolled-out session.
struct SessionCandidate {
  int candidate_index = 0;
  std::string id;
  memory::SessionTranscript transcript;
  std::vector<std::string> skill_refs;  // one per counselor turn
  std::uint64_t seed = 0;
  std::optional<RewardReport> reward;
  bool failed = false;
  std::string error;

  friend bool operator==(const SessionCandidate&, const SessionCandidate&) = default;

  bool scored() const { return !failed && reward.has_value(); }
  nlohmann::json to_json() const;
  static SessionCandidate from_json(const nlohmann::json& j);
};

}  // namespace evocounsel::rollout
