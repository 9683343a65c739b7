#pragma once

#include <memory>
#include <string>
#include <vector>

#include "evocounsel/gateway/chat.hpp"

namespace evocounsel::gateway {

struct HttpBackendConfig {
  /// Base URL including any path prefix, e.g. "https://api.example.com/v1".
  /// Requests go to "<endpoint>/chat/completions".
  std::string endpoint;
  std::string model;
  std::string api_key;
  std::string embedding_model;
  double timeout_s = 60.0;
  /// Extra attempts after the first; total attempts = max_retries + 1.
  int max_retries = 3;
  int backoff_initial_ms = 500;
  double backoff_multiplier = 2.0;
  int backoff_max_ms = 8000;
  /// Upper bound on concurrent in-flight requests through this handle.
  int parallelism = 4;
};

/// Client for OpenAI-compatible chat-completions endpoints.
///
/// Retries connection failures, 408, 429 and 5xx with exponential backoff.
/// Other 4xx responses fail immediately.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  ChatResponse complete(const ChatRequest& request) override;
  std::string describe() const override;

  /// POST <endpoint>/embeddings with `embedding_model` (falls back to `model`).
  std::vector<double> embed(const std::string& text);

  /// Attempts made by the most recent call on this thread.
  static int last_attempts();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace evocounsel::gateway
