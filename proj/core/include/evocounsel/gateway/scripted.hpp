#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/gateway/chat.hpp"

namespace evocounsel::gateway {

/// One scripted reply.
///
/// An entry matches a request when every populated matcher agrees: `tag`
/// equals the request tag, every `contains` string occurs in the prompt text,
/// and every `labels` pair equals the request label of the same name. An entry
/// with no matchers is a catch-all.
///
/// `response` may reference request labels as `{{name}}`; `{{tag}}` and
/// `{{seed}}` are also available.
struct ScriptEntry {
  std::string tag;
  std::vector<std::string> contains;
  std::map<std::string, std::string> labels;
  std::string response;
  FinishReason finish_reason = FinishReason::Stop;

  bool matches(const ChatRequest& request) const;
};

enum class ScriptMode { ByTag, Sequential };

struct ResponseScript {
  ScriptMode mode = ScriptMode::ByTag;
  std::vector<ScriptEntry> entries;

  /// {"mode": "by_tag"|"sequential", "entries": [{"tag", "contains", "labels", "response"}]}.
  /// `response` may be a string or any JSON value (serialized compactly).
  static ResponseScript from_json(const nlohmann::json& j);
  static ResponseScript load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

/// Deterministic backend for tests and offline runs.
///
/// by_tag: the first matching entry answers; lookups are stateless.
/// sequential: entries are consumed in order exactly once.
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(ResponseScript script, std::string name = "scripted");

  ChatResponse complete(const ChatRequest& request) override;
  std::string describe() const override { return name_; }

  std::size_t calls() const { return calls_.load(); }
  std::size_t calls_with_tag(const std::string& tag) const;
  std::size_t remaining() const;

 private:
  ResponseScript script_;
  std::string name_;
  mutable std::mutex mu_;
  std::size_t cursor_ = 0;
  std::map<std::string, std::size_t> per_tag_;
  std::atomic<std::size_t> calls_{0};
};

/// Backend that forwards to a callable. Handy for fault injection in tests.
class FunctionBackend final : public Backend {
 public:
  using Fn = std::function<ChatResponse(const ChatRequest&)>;
  explicit FunctionBackend(Fn fn, std::string name = "function") : fn_(std::move(fn)), name_(std::move(name)) {}
  ChatResponse complete(const ChatRequest& request) override { return fn_(request); }
  std::string describe() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

}  // namespace evocounsel::gateway
