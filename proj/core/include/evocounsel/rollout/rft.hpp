#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/rollout/lifelong.hpp"

namespace evocounsel::rollout {

/// One golden-trajectory record. `input` holds the memory snapshot, plan and
/// dialogue segments, each with a `masked` flag telling the trainer to leave
/// it out of the loss; `target` holds the winner's counselor turns.
struct RftRecord {
  int session_index = 0;
  std::string session_id;
  std::string memory_snapshot_id;
  std::optional<std::string> previous_session_id;
  bool history_masked = true;
  nlohmann::json input;
  nlohmann::json target;

  friend bool operator==(const RftRecord&, const RftRecord&) = default;

  nlohmann::json to_json() const;
  static RftRecord from_json(const nlohmann::json& j);
};

inline constexpr std::string_view kRftHeader =
    "# evocounsel rft dataset v1: one winning session per line (session_index, input, target)";

/// One record per winning session, in session order. EmissionError when a
/// session has no winner transcript.
std::vector<RftRecord> emit_rft_dataset(const LifelongRun& run, bool history_masking = true);

std::string serialize_rft(std::span<const RftRecord> records);
std::vector<RftRecord> parse_rft(std::string_view jsonl);

}  // namespace evocounsel::rollout
