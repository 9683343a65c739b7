#include "evocounsel/memory/sft.hpp"

#include <sstream>

#include "evocounsel/common/digest.hpp"
#include "evocounsel/common/errors.hpp"

namespace evocounsel::memory {

std::string_view to_string(SftTask task) {
  switch (task) {
    case SftTask::Mem: return "mem";
    case SftTask::Plan: return "plan";
    case SftTask::Resp: return "resp";
  }
  return "resp";
}

nlohmann::json SftRecord::to_json() const {
  return {{"task", memory::to_string(task)},
          {"input", input},
          {"output", output},
          {"session_id", session_id},
          {"turn_id", turn_id ? nlohmann::json(*turn_id) : nlohmann::json(nullptr)}};
}

SftRecord SftRecord::from_json(const nlohmann::json& j) {
  SftRecord r;
  const auto task = j.at("task").get<std::string>();
  if (task == "mem") r.task = SftTask::Mem;
  else if (task == "plan") r.task = SftTask::Plan;
  else if (task == "resp") r.task = SftTask::Resp;
  else throw ParseError("unknown sft task '" + task + "'");
  r.input = j.at("input");
  r.output = j.at("output");
  r.session_id = j.at("session_id").get<std::string>();
  if (!j.at("turn_id").is_null()) r.turn_id = j["turn_id"].get<int>();
  return r;
}

std::vector<SftRecord> emit_sft_records(std::span<const SftSessionSource> sessions) {
  std::vector<SftRecord> out;
  for (const auto& s : sessions) {
    auto fail = [&](const std::string& what) {
      throw EmissionError("session " + s.session_id + " (t=" + std::to_string(s.session_index) + "): " + what);
    };
    if (auto issues = s.transcript.validate(); !issues.empty()) fail("invalid transcript: " + issues.front());
    if (!s.memory_before) fail("missing memory snapshot annotation");
    const nlohmann::json memory_json = s.memory_before->to_json();

    if (s.memory_extracted) {
      if (!s.delta || !s.summary) fail("missing memory extraction annotations (delta/summary)");
      nlohmann::json turns = nlohmann::json::array();
      for (const auto& t : s.transcript.turns) turns.push_back(memory::to_json(t));
      out.push_back({SftTask::Mem,
                     {{"session_index", s.session_index},
                      {"profile_before", memory::to_json(s.memory_before->profile)},
                      {"transcript", std::move(turns)}},
                     {{"delta", memory::to_json(*s.delta)}, {"summary", memory::to_json(*s.summary)}},
                     s.session_id,
                     std::nullopt});
    }
    if (s.planned) {
      out.push_back({SftTask::Plan,
                     {{"session_index", s.session_index}, {"memory", memory_json}},
                     memory::to_json(s.transcript.plan),
                     s.session_id,
                     std::nullopt});
    }

    nlohmann::json history = nlohmann::json::array();
    int turn_id = 0;
    std::string last_user;
    for (const auto& t : s.transcript.turns) {
      if (const auto* c = std::get_if<ClientTurn>(&t)) {
        last_user = c->text;
      } else {
        const auto& ct = std::get<CounselorTurn>(t);
        ++turn_id;
        if (ct.skill_ref.empty()) fail("counselor turn " + std::to_string(turn_id) + " has no skill annotation");
        out.push_back({SftTask::Resp,
                       {{"user_message", last_user},
                        {"history", history},
                        {"memory", memory_json},
                        {"plan", memory::to_json(s.transcript.plan)},
                        {"skill", {{"id", ct.skill_ref}, {"name", ct.skill_name}}}},
                       {{"reasoning", ct.reasoning}, {"response", ct.response}},
                       s.session_id,
                       turn_id});
        // history for the next turn holds everything up to and including this exchange
        history.push_back({{"role", "client"}, {"text", last_user}});
        history.push_back({{"role", "counselor"}, {"text", ct.response}});
      }
    }
  }
  return out;
}

std::string serialize_sft(std::span<const SftRecord> records) {
  std::string out(kSftHeader);
  out.push_back('\n');
  for (const auto& r : records) {
    out += canonical_json(r.to_json());
    out.push_back('\n');
  }
  return out;
}

std::vector<SftRecord> parse_sft(std::string_view jsonl) {
  std::vector<SftRecord> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    out.push_back(SftRecord::from_json(nlohmann::json::parse(line)));
  }
  return out;
}

}  // namespace evocounsel::memory
