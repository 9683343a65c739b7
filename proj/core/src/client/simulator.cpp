#include "evocounsel/client/simulator.hpp"

#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/text.hpp"
#include "evocounsel/gateway/structured.hpp"

namespace evocounsel::client {

using gateway::FieldKind;
using gateway::Role;

namespace {

const gateway::OutputSchema& client_schema() {
  static const gateway::OutputSchema schema{"client_turn",
                                            {{"text", FieldKind::String, true},
                                             {"end_signal", FieldKind::Boolean, false},
                                             {"self_report", FieldKind::Object, false}}};
  return schema;
}

}  // namespace

std::string persona_prompt(const ClientProfileCard& card) {
  std::string out = "You are role-playing a counseling client. Stay in character and speak only as the client.\n";
  out += "Client card: " + card.card_id + "\n";
  for (const auto& [k, v] : card.demographics) out += k + ": " + v + "\n";
  out += "Presenting problem: " + card.presenting_problem + "\n";
  out += "Personality: " + card.personality_notes + "\n";
  out += "Baseline distress (1-10): " + text::trim(nlohmann::json(card.distress_baseline).dump()) + "\n";
  out += "Set end_signal to true only when you want to end this session. Optionally include self_report with "
         "negative_affect and positive_affect on a 1-10 scale.\n";
  out += gateway::format_instruction(client_schema());
  return out;
}

memory::ClientTurn simulate_client_turn(gateway::Backend& backend, const ClientProfileCard& card,
                                        std::span<const memory::Turn> history, const gateway::CallContext& call,
                                        const gateway::TaskOptions& options) {
  if (auto issues = card.validate(); !issues.empty()) throw PreconditionError("simulate_client_turn: " + issues.front());
  std::vector<gateway::Message> messages{{Role::System, persona_prompt(card)}};
  if (history.empty()) {
    messages.push_back({Role::User, "(The session begins. Open the conversation as the client.)"});
  }
  // From the client's side the counselor is the interlocutor.
  for (const auto& turn : history) {
    if (const auto* c = std::get_if<memory::ClientTurn>(&turn)) messages.push_back({Role::Assistant, c->text});
    else messages.push_back({Role::User, std::get<memory::CounselorTurn>(turn).response});
  }

  gateway::StructuredOptions so;
  so.max_repairs = options.max_repairs;
  so.check = [](const nlohmann::json& v) -> std::optional<std::string> {
    if (text::trim(v["text"].get<std::string>()).empty()) return "text must be non-empty";
    if (v.contains("self_report") && v["self_report"].is_object()) {
      for (const auto& [k, val] : v["self_report"].items()) {
        if (!val.is_number()) return "self_report." + k + " must be a number";
      }
    }
    return std::nullopt;
  };
  const auto value = gateway::complete_structured(backend, call.request("client_turn", std::move(messages), options),
                                                  client_schema(), so);
  memory::ClientTurn turn;
  turn.text = value["text"].get<std::string>();
  turn.end_signal = value.contains("end_signal") && value["end_signal"].is_boolean() && value["end_signal"].get<bool>();
  if (value.contains("self_report") && value["self_report"].is_object()) {
    for (const auto& [k, val] : value["self_report"].items()) turn.self_report[k] = val.get<double>();
  }
  return turn;
}

}  // namespace evocounsel::client
