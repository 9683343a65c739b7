#include "evocounsel/memory/transcript.hpp"

#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/text.hpp"

namespace evocounsel::memory {

std::size_t SessionTranscript::counselor_turns() const {
  std::size_t n = 0;
  for (const auto& t : turns) n += std::holds_alternative<CounselorTurn>(t) ? 1 : 0;
  return n;
}

std::vector<std::string> SessionTranscript::validate() const {
  std::vector<std::string> issues;
  if (turns.empty()) {
    issues.push_back("transcript has no turns");
    return issues;
  }
  std::size_t last_client = 0;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const bool expect_client = i % 2 == 0;
    if (std::holds_alternative<ClientTurn>(turns[i]) != expect_client) {
      issues.push_back("turn " + std::to_string(i) + ": expected " + (expect_client ? "client" : "counselor"));
    }
    if (std::holds_alternative<ClientTurn>(turns[i])) last_client = i;
    if (const auto* c = std::get_if<CounselorTurn>(&turns[i]); c && text::trim(c->response).empty()) {
      issues.push_back("turn " + std::to_string(i) + ": empty counselor response");
    }
  }
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (const auto* c = std::get_if<ClientTurn>(&turns[i]); c && c->end_signal && i != last_client) {
      issues.push_back("turn " + std::to_string(i) + ": end_signal before the final client turn");
    }
  }
  return issues;
}

std::string SessionTranscript::render_dialogue() const {
  std::string out;
  for (const auto& t : turns) {
    if (const auto* c = std::get_if<ClientTurn>(&t)) out += "Client: " + c->text + "\n";
    else out += "Counselor: " + std::get<CounselorTurn>(t).response + "\n";
  }
  return out;
}

nlohmann::json to_json(const Turn& turn) {
  if (const auto* c = std::get_if<ClientTurn>(&turn)) {
    nlohmann::json j = {{"role", "client"}, {"text", c->text}, {"end_signal", c->end_signal}};
    if (!c->self_report.empty()) j["self_report"] = c->self_report;
    return j;
  }
  const auto& c = std::get<CounselorTurn>(turn);
  return {{"role", "counselor"},
          {"reasoning", c.reasoning},
          {"skill_ref", c.skill_ref},
          {"skill_name", c.skill_name},
          {"response", c.response}};
}

Turn turn_from_json(const nlohmann::json& j) {
  const auto role = j.at("role").get<std::string>();
  if (role == "client") {
    ClientTurn c;
    c.text = j.at("text").get<std::string>();
    c.end_signal = j.value("end_signal", false);
    if (j.contains("self_report")) c.self_report = j["self_report"].get<std::map<std::string, double>>();
    return c;
  }
  if (role == "counselor") {
    return CounselorTurn{j.value("reasoning", ""), j.value("skill_ref", ""), j.value("skill_name", ""),
                         j.at("response").get<std::string>()};
  }
  throw ParseError("unknown turn role '" + role + "'");
}

nlohmann::json to_json(const SessionTranscript& transcript) {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : transcript.turns) turns.push_back(to_json(t));
  return {{"session_index", transcript.session_index},
          {"plan", to_json(transcript.plan)},
          {"memory_snapshot_id", transcript.memory_snapshot_id},
          {"turns", std::move(turns)}};
}

SessionTranscript transcript_from_json(const nlohmann::json& j) {
  SessionTranscript t;
  t.session_index = j.at("session_index").get<int>();
  t.plan = plan_from_json(j.at("plan"));
  t.memory_snapshot_id = j.value("memory_snapshot_id", "");
  for (const auto& turn : j.at("turns")) t.turns.push_back(turn_from_json(turn));
  return t;
}

}  // namespace evocounsel::memory
