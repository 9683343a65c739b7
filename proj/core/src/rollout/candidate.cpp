#include "evocounsel/rollout/candidate.hpp"

#include <cstdio>

namespace evocounsel::rollout {

std::string candidate_id(int session_index, int candidate_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t%03d-c%03d", session_index, candidate_index);
  return buf;
}

nlohmann::json SessionCandidate::to_json() const {
  return {{"candidate_index", candidate_index},
          {"id", id},
          {"transcript", memory::to_json(transcript)},
          {"skill_refs", skill_refs},
          {"seed", seed},
          {"reward", reward ? reward->to_json() : nlohmann::json()},
          {"failed", failed},
          {"error", error}};
}

SessionCandidate SessionCandidate::from_json(const nlohmann::json& j) {
  SessionCandidate c;
  c.candidate_index = j.at("candidate_index").get<int>();
  c.id = j.at("id").get<std::string>();
  c.transcript = memory::transcript_from_json(j.at("transcript"));
  c.skill_refs = j.at("skill_refs").get<std::vector<std::string>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("reward") && !j["reward"].is_null()) c.reward = RewardReport::from_json(j["reward"]);
  c.failed = j.value("failed", false);
  c.error = j.value("error", "");
  return c;
}

}  // namespace evocounsel::rollout
