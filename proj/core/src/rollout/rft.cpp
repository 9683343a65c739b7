#include "evocounsel/rollout/rft.hpp"

#include <sstream>

#include "evocounsel/common/digest.hpp"
#include "evocounsel/common/errors.hpp"

namespace evocounsel::rollout {

nlohmann::json RftRecord::to_json() const {
  return {{"session_index", session_index},
          {"session_id", session_id},
          {"memory_snapshot_id", memory_snapshot_id},
          {"previous_session_id", previous_session_id ? nlohmann::json(*previous_session_id) : nlohmann::json()},
          {"history_masked", history_masked},
          {"input", input},
          {"target", target}};
}

RftRecord RftRecord::from_json(const nlohmann::json& j) {
  RftRecord r;
  r.session_index = j.at("session_index").get<int>();
  r.session_id = j.at("session_id").get<std::string>();
  r.memory_snapshot_id = j.at("memory_snapshot_id").get<std::string>();
  if (!j.at("previous_session_id").is_null()) r.previous_session_id = j["previous_session_id"].get<std::string>();
  r.history_masked = j.at("history_masked").get<bool>();
  r.input = j.at("input");
  r.target = j.at("target");
  return r;
}

std::vector<RftRecord> emit_rft_dataset(const LifelongRun& run, bool history_masking) {
  std::vector<RftRecord> out;
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    const auto& rec = run.records[i];
    if (i >= run.winners.size() || run.winners[i].id != rec.session_id)
      throw EmissionError("session " + std::to_string(rec.session_index) + ": no winning transcript");
    if (i >= run.memories.size())
      throw EmissionError("session " + std::to_string(rec.session_index) + ": no memory snapshot");
    const auto& winner = run.winners[i];
    const auto& memory = run.memories[i];

    RftRecord r;
    r.session_index = rec.session_index;
    r.session_id = rec.session_id;
    r.memory_snapshot_id = memory.digest();
    if (i > 0) r.previous_session_id = run.records[i - 1].session_id;
    r.history_masked = history_masking;

    nlohmann::json dialogue = nlohmann::json::array();
    nlohmann::json targets = nlohmann::json::array();
    int turn_id = 0;
    for (const auto& t : winner.transcript.turns) {
      if (const auto* c = std::get_if<memory::ClientTurn>(&t)) {
        dialogue.push_back({{"role", "client"}, {"text", c->text}, {"masked", history_masking}});
      } else {
        const auto& ct = std::get<memory::CounselorTurn>(t);
        ++turn_id;
        // counselor turns are the loss-bearing segments
        dialogue.push_back({{"role", "counselor"}, {"turn_id", turn_id}, {"masked", false}});
        targets.push_back({{"turn_id", turn_id},
                           {"reasoning", ct.reasoning},
                           {"response", ct.response},
                           {"skill", {{"id", ct.skill_ref}, {"name", ct.skill_name}}}});
      }
    }
    r.input = {{"memory", {{"snapshot", memory.to_json()}, {"masked", history_masking}}},
               {"plan", memory::to_json(winner.transcript.plan)},
               {"dialogue", std::move(dialogue)}};
    r.target = {{"turns", std::move(targets)}};
    out.push_back(std::move(r));
  }
  return out;
}

std::string serialize_rft(std::span<const RftRecord> records) {
  std::string out(kRftHeader);
  out.push_back('\n');
  for (const auto& r : records) {
    out += canonical_json(r.to_json());
    out.push_back('\n');
  }
  return out;
}

std::vector<RftRecord> parse_rft(std::string_view jsonl) {
  std::vector<RftRecord> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(RftRecord::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("rft record: ") + e.what());
    }
  }
  return out;
}

}  // namespace evocounsel::rollout
