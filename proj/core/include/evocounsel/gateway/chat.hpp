#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace evocounsel::gateway {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);
Role parse_role(std::string_view name);

struct Message {
  Role role = Role::User;
  std::string text;

  friend bool operator==(const Message&, const Message&) = default;
};

/// One chat-completion call. `tag` names the calling task (e.g. "plan_reasoning").
/// `labels` carry routing metadata (scope, session, candidate, turn); they are
/// never sent to a live endpoint and do not take part in the request digest.
struct ChatRequest {
  std::vector<Message> messages;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::string tag;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> labels;

  /// Concatenated message texts, used for substring matching.
  std::string prompt_text() const;
};

enum class FinishReason { Stop, Length, Error };

std::string_view to_string(FinishReason reason);
FinishReason parse_finish_reason(std::string_view name);

struct Usage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::Stop;
  Usage usage;
};

/// Throws PreconditionError when the request breaks its invariants.
void validate(const ChatRequest& request);

nlohmann::json to_json(const ChatRequest& request);
std::string request_digest(const ChatRequest& request);

/// A chat-completion backend. Implementations must be safe for concurrent calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  virtual std::string describe() const = 0;
};

using BackendHandle = std::shared_ptr<Backend>;

/// Validates the request, dispatches, and checks the response invariant
/// (non-empty text on a normal stop).
ChatResponse complete(Backend& backend, const ChatRequest& request);

}  // namespace evocounsel::gateway
