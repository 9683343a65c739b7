#include "evocounsel/gateway/chat.hpp"

#include "evocounsel/common/digest.hpp"
#include "evocounsel/common/errors.hpp"

namespace evocounsel::gateway {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view name) {
  if (name == "system") return Role::System;
  if (name == "user") return Role::User;
  if (name == "assistant") return Role::Assistant;
  throw ParseError("unknown chat role '" + std::string(name) + "'");
}

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::Error: return "error";
  }
  return "error";
}

FinishReason parse_finish_reason(std::string_view name) {
  if (name == "stop") return FinishReason::Stop;
  if (name == "length") return FinishReason::Length;
  return FinishReason::Error;
}

std::string ChatRequest::prompt_text() const {
  std::string out;
  for (const auto& m : messages) {
    out += m.text;
    out.push_back('\n');
  }
  return out;
}

void validate(const ChatRequest& request) {
  std::vector<std::string> issues;
  if (request.messages.empty()) issues.push_back("messages: must be non-empty");
  else if (request.messages.front().role == Role::Assistant)
    issues.push_back("messages[0].role: must be system or user");
  if (request.temperature < 0.0) issues.push_back("temperature: must be >= 0");
  if (request.max_tokens <= 0) issues.push_back("max_tokens: must be positive");
  if (request.tag.empty()) issues.push_back("tag: must be non-empty");
  if (!issues.empty()) {
    std::string msg = "invalid chat request";
    for (const auto& i : issues) msg += "; " + i;
    throw PreconditionError(msg);
  }
}

nlohmann::json to_json(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
  }
  nlohmann::json out = {{"messages", std::move(messages)},
                        {"temperature", request.temperature},
                        {"max_tokens", request.max_tokens},
                        {"tag", request.tag}};
  if (request.seed) out["seed"] = *request.seed;
  return out;
}

std::string request_digest(const ChatRequest& request) { return json_digest(to_json(request)); }

ChatResponse complete(Backend& backend, const ChatRequest& request) {
  validate(request);
  ChatResponse response = backend.complete(request);
  if (response.finish_reason == FinishReason::Stop && response.text.empty()) {
    throw TransportError(backend.describe() + ": empty completion with finish_reason=stop", 1);
  }
  return response;
}

}  // namespace evocounsel::gateway
