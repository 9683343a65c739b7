#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/memory/memory_state.hpp"
#include "evocounsel/memory/profile.hpp"
#include "evocounsel/memory/transcript.hpp"

namespace evocounsel::memory {

/// Annotations of one winning session needed to build instruction data.
struct SftSessionSource {
  std::string session_id;
  SessionIndex session_index = 0;
  SessionTranscript transcript;
  /// M_t: memory the session was planned and generated from.
  std::optional<MemoryState> memory_before;
  /// Memory extraction outputs (absent when memory was ablated).
  bool memory_extracted = true;
  std::optional<ProfileDelta> delta;
  std::optional<SessionSummary> summary;
  /// Whether the plan came from plan reasoning (false for the ablation's fixed plan).
  bool planned = true;
};

enum class SftTask { Mem, Plan, Resp };

std::string_view to_string(SftTask task);

struct SftRecord {
  SftTask task = SftTask::Resp;
  nlohmann::json input;
  nlohmann::json output;
  std::string session_id;
  std::optional<int> turn_id;

  friend bool operator==(const SftRecord&, const SftRecord&) = default;

  nlohmann::json to_json() const;
  static SftRecord from_json(const nlohmann::json& j);
};

inline constexpr std::string_view kSftHeader = "# evocounsel sft dataset v1: fields task,input,output,session_id,turn_id";

/// One mem record (transcript -> delta + summary) and one plan record
/// (memory -> plan) per session, plus one resp record per counselor turn.
/// Throws EmissionError naming the session when annotations are missing.
std::vector<SftRecord> emit_sft_records(std::span<const SftSessionSource> sessions);

/// Header comment line followed by one canonical JSON object per line.
std::string serialize_sft(std::span<const SftRecord> records);
std::vector<SftRecord> parse_sft(std::string_view jsonl);

}  // namespace evocounsel::memory
