#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/memory/plan.hpp"
#include "evocounsel/memory/profile.hpp"

namespace evocounsel::memory {

/// u_i: what the client says. `self_report` holds optional affect scores.
struct ClientTurn {
  std::string text;
  bool end_signal = false;
  std::map<std::string, double> self_report;

  friend bool operator==(const ClientTurn&, const ClientTurn&) = default;
};

/// z_i / r_i plus the atomic skill directive that conditioned the turn.
struct CounselorTurn {
  std::string reasoning;
  std::string skill_ref;
  std::string skill_name;
  std::string response;

  friend bool operator==(const CounselorTurn&, const CounselorTurn&) = default;
};

using Turn = std::variant<ClientTurn, CounselorTurn>;

struct SessionTranscript {
  SessionIndex session_index = 0;
  std::vector<Turn> turns;
  SessionPlan plan;
  std::string memory_snapshot_id;

  friend bool operator==(const SessionTranscript&, const SessionTranscript&) = default;

  std::size_t counselor_turns() const;
  /// Non-empty, alternating, starting with the client; end_signal only on the last client turn.
  std::vector<std::string> validate() const;
  /// "Client: ...\nCounselor: ..." rendering used in extraction and judge prompts.
  std::string render_dialogue() const;
};

nlohmann::json to_json(const Turn& turn);
Turn turn_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SessionTranscript& transcript);
SessionTranscript transcript_from_json(const nlohmann::json& j);

}  // namespace evocounsel::memory
