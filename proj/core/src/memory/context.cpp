#include "evocounsel/memory/context.hpp"

#include "evocounsel/common/digest.hpp"
#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/text.hpp"
#include "evocounsel/gateway/structured.hpp"

namespace evocounsel::memory {

using gateway::FieldKind;
using gateway::Message;
using gateway::OutputSchema;
using gateway::Role;

namespace {

constexpr const char* kCounselorPersona =
    "You are a professional psychological counselor working with this client across multiple sessions. "
    "Stay consistent with the client memory, pursue the session plan, and apply the skill directive in this turn.";

void require_complete(const SessionTranscript& transcript) {
  if (auto issues = transcript.validate(); !issues.empty()) {
    throw PreconditionError("session " + std::to_string(transcript.session_index) +
                            " transcript is not complete: " + issues.front());
  }
}

}  // namespace

std::string PromptContext::digest() const {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) msgs.push_back({gateway::to_string(m.role), m.text});
  return json_digest(msgs);
}

std::string render_memory(const MemoryState& memory) {
  std::string out = "[PROFILE]\n";
  out += "profile_id: " + (memory.profile.profile_id.empty() ? std::string("(unassigned)") : memory.profile.profile_id) + "\n";
  if (memory.profile.attributes.empty()) out += "(no recorded attributes)\n";
  for (const auto& [key, attr] : memory.profile.attributes) {
    out += "- " + key + ": " + attr.value + " (first seen session " + std::to_string(attr.first_seen) +
           ", updated session " + std::to_string(attr.last_updated) + ")\n";
  }
  if (!memory.profile.free_text.empty()) out += "narrative: " + memory.profile.free_text + "\n";
  out += "[SUMMARIES]\n";
  if (memory.summaries.empty()) out += "(no prior sessions)\n";
  for (const auto& s : memory.summaries) {
    out += "Session " + std::to_string(s.session_index) + " | emotional shifts: " + s.emotional_shifts +
           " | outcomes: " + s.intervention_outcomes + " | key events: ";
    for (std::size_t i = 0; i < s.key_events.size(); ++i) out += (i ? "; " : "") + s.key_events[i];
    out += "\n";
  }
  out += "[MEMORY] " + memory.digest() + "\n";
  return out;
}

std::string render_plan(const SessionPlan& plan) {
  std::string out = "[PLAN]\nstage: " + std::string(display_name(plan.stage)) + "\n";
  for (const auto& o : plan.objectives) out += "objective: " + o + "\n";
  return out;
}

std::string render_skill(const skills::AtomicSkill& skill) {
  std::string out = "[SKILL] " + skill.name + ": " + skill.definition + "\n";
  if (!skill.when_to_use.empty()) out += "when_to_use: " + skill.when_to_use + "\n";
  if (!skill.trigger.empty()) out += "trigger: " + skill.trigger + "\n";
  return out;
}

namespace {

const OutputSchema& turn_schema() {
  static const OutputSchema schema{"counselor_turn",
                                   {{"reasoning", FieldKind::String, true}, {"response", FieldKind::String, true}}};
  return schema;
}

const OutputSchema& plan_schema() {
  static const OutputSchema schema{"session_plan",
                                   {{"stage", FieldKind::String, true}, {"objectives", FieldKind::List, true}}};
  return schema;
}

const OutputSchema& delta_schema() {
  static const OutputSchema schema{"profile_delta",
                                   {{"upserts", FieldKind::List, true},
                                    {"removals", FieldKind::List, true},
                                    {"narrative_patch", FieldKind::String, false}}};
  return schema;
}

const OutputSchema& summary_schema() {
  static const OutputSchema schema{"session_summary",
                                   {{"emotional_shifts", FieldKind::String, true},
                                    {"intervention_outcomes", FieldKind::String, true},
                                    {"key_events", FieldKind::List, true}}};
  return schema;
}

}  // namespace

PromptContext assemble_context(const std::string& user_message, const MemoryState& memory, const SessionPlan& plan,
                               const skills::AtomicSkill& skill, std::span<const Turn> history) {
  PromptContext ctx;
  ctx.user_message = user_message;
  ctx.memory_digest = memory.digest();
  ctx.plan_digest = json_digest(to_json(plan));
  ctx.skill_digest = json_digest({skill.id, skill.name, skill.definition, skill.when_to_use, skill.trigger});

  std::string system = std::string(kCounselorPersona) + "\n" + render_memory(memory) + render_plan(plan) +
                       render_skill(skill) +
                       "Think about the client's state before answering. " +
                       gateway::format_instruction(turn_schema());
  ctx.messages.push_back({Role::System, std::move(system)});
  for (const auto& turn : history) {
    if (const auto* c = std::get_if<ClientTurn>(&turn)) ctx.messages.push_back({Role::User, c->text});
    else ctx.messages.push_back({Role::Assistant, std::get<CounselorTurn>(turn).response});
  }
  ctx.messages.push_back({Role::User, user_message});
  return ctx;
}

CounselorTurn generate_turn(gateway::Backend& backend, const PromptContext& context, const skills::AtomicSkill& skill,
                            const gateway::CallContext& call, const gateway::TaskOptions& options) {
  if (context.messages.empty()) throw PreconditionError("generate_turn: context not assembled");
  gateway::StructuredOptions so;
  so.max_repairs = options.max_repairs;
  so.check = [](const nlohmann::json& v) -> std::optional<std::string> {
    if (text::trim(v["response"].get<std::string>()).empty()) return "field 'response' must be non-empty";
    return std::nullopt;
  };
  const auto value = gateway::complete_structured(
      backend, call.request("response_generation", context.messages, options), turn_schema(), so);
  return CounselorTurn{value["reasoning"].get<std::string>(), skill.id, skill.name, value["response"].get<std::string>()};
}

SessionPlan reason_plan(gateway::Backend& backend, const MemoryState& memory, SessionIndex session_index,
                        const PlanOptions& options, const gateway::CallContext& call) {
  if (auto issues = memory.validate(); !issues.empty()) throw PreconditionError("reason_plan: " + issues.front());
  std::string user = "Plan counseling session " + std::to_string(session_index) + ".\n";
  if (memory.empty()) {
    user += "This is the first session with this client; there is no prior memory.\n";
  }
  user += render_memory(memory);
  user += "Choose the therapeutic stage (one of: Case Conceptualization, Core Intervention, Consolidation and "
          "Prevention) and between 1 and " +
          std::to_string(options.max_objectives) + " concrete objectives for this session.\n";
  user += gateway::format_instruction(plan_schema());

  gateway::StructuredOptions so;
  so.max_repairs = options.task.max_repairs;
  so.check = [&](const nlohmann::json& v) -> std::optional<std::string> {
    if (!parse_stage(v["stage"].get<std::string>())) {
      return "unknown stage '" + v["stage"].get<std::string>() + "'";
    }
    for (const auto& o : v["objectives"]) {
      if (!o.is_string()) return "objectives must be strings";
    }
    SessionPlan plan{*parse_stage(v["stage"].get<std::string>()), v["objectives"].get<std::vector<std::string>>()};
    if (auto issues = plan.validate(options.max_objectives); !issues.empty()) return issues.front();
    return std::nullopt;
  };
  const auto value = gateway::complete_structured(
      backend,
      call.request("plan_reasoning",
                   {{Role::System, "You are a counseling supervisor who plans each session from the client's memory."},
                    {Role::User, std::move(user)}},
                   options.task),
      plan_schema(), so);
  return plan_from_json(value);
}

SessionPlan generic_plan() {
  return SessionPlan{TherapeuticStage::CoreIntervention, {"Offer supportive counseling for the client's current concerns"}};
}

ProfileDelta extract_attributes(gateway::Backend& backend, const SessionTranscript& transcript,
                                const ClientProfile& profile, const gateway::CallContext& call,
                                const gateway::TaskOptions& options) {
  require_complete(transcript);
  std::string user = "Current client profile:\n" + to_json(profile).dump() + "\n\nSession " +
                     std::to_string(transcript.session_index) + " transcript:\n" + transcript.render_dialogue() +
                     "\nList profile changes stated by the client in this session: upserts as [key, value] pairs "
                     "(e.g. changes in family status, new medical diagnoses), removals as keys that no longer "
                     "apply. Use only information stated in the transcript.\n" +
                     gateway::format_instruction(delta_schema());
  gateway::StructuredOptions so;
  so.max_repairs = options.max_repairs;
  so.check = [](const nlohmann::json& v) -> std::optional<std::string> {
    try {
      auto issues = delta_from_json(v).validate();
      if (!issues.empty()) return issues.front();
    } catch (const std::exception& e) {
      return e.what();
    }
    return std::nullopt;
  };
  const auto value = gateway::complete_structured(
      backend,
      call.request("attribute_extraction",
                   {{Role::System, "You maintain a structured client profile for a counselor."}, {Role::User, std::move(user)}},
                   options),
      delta_schema(), so);
  return delta_from_json(value).normalized();
}

SessionSummary summarize_session(gateway::Backend& backend, const SessionTranscript& transcript,
                                 const gateway::CallContext& call, const gateway::TaskOptions& options) {
  require_complete(transcript);
  std::string user = "Session " + std::to_string(transcript.session_index) + " transcript:\n" +
                     transcript.render_dialogue() +
                     "\nSummarize the session: the client's key emotional shifts, the outcomes of the "
                     "interventions used, and the key events.\n" +
                     gateway::format_instruction(summary_schema());
  gateway::StructuredOptions so;
  so.max_repairs = options.max_repairs;
  so.check = [](const nlohmann::json& v) -> std::optional<std::string> {
    for (const auto& e : v["key_events"]) {
      if (!e.is_string()) return "key_events must be strings";
    }
    return std::nullopt;
  };
  const auto value = gateway::complete_structured(
      backend,
      call.request("session_summary",
                   {{Role::System, "You write structured episodic summaries of counseling sessions."},
                    {Role::User, std::move(user)}},
                   options),
      summary_schema(), so);
  SessionSummary s;
  s.session_index = transcript.session_index;
  s.emotional_shifts = value["emotional_shifts"].get<std::string>();
  s.intervention_outcomes = value["intervention_outcomes"].get<std::string>();
  s.key_events = value["key_events"].get<std::vector<std::string>>();
  return s;
}

}  // namespace evocounsel::memory
