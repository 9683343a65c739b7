#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/gateway/chat.hpp"

namespace evocounsel::gateway {

struct GatewayLogEntry {
  std::string backend;
  std::string scope;  // request label "scope", e.g. "t001/c02"
  std::uint64_t seq = 0;
  std::string tag;
  std::string request_digest;
  std::string response_text;
  std::string finish_reason;
  double latency_ms = 0.0;
  std::string error;

  nlohmann::json to_json() const;
};

/// Thread-safe collector of gateway calls.
///
/// Calls within one scope are sequential, so sorting by (scope, seq) gives an
/// order that does not depend on thread scheduling.
class GatewayLog {
 public:
  void record(GatewayLogEntry entry);
  /// Removes and returns all pending entries in (scope, seq) order.
  std::vector<GatewayLogEntry> drain();
  std::size_t total_recorded() const;
  /// Number of recorded calls (drained or not) whose tag equals `tag`.
  std::size_t count_tag(const std::string& tag) const;

 private:
  mutable std::mutex mu_;
  std::uint64_t next_seq_ = 0;
  std::vector<GatewayLogEntry> pending_;
  std::vector<std::string> all_tags_;
};

/// Decorator that records every call on the shared log.
class LoggingBackend final : public Backend {
 public:
  LoggingBackend(BackendHandle inner, std::string name, std::shared_ptr<GatewayLog> log)
      : inner_(std::move(inner)), name_(std::move(name)), log_(std::move(log)) {}

  ChatResponse complete(const ChatRequest& request) override;
  std::string describe() const override { return name_ + ":" + inner_->describe(); }
  const BackendHandle& inner() const { return inner_; }

 private:
  BackendHandle inner_;
  std::string name_;
  std::shared_ptr<GatewayLog> log_;
};

}  // namespace evocounsel::gateway
