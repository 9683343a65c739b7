#include "evocounsel/gateway/http_backend.hpp"

#include <algorithm>
#include <chrono>
#include <semaphore>
#include <thread>

#include <httplib.h>

#include "evocounsel/common/errors.hpp"

namespace evocounsel::gateway {

namespace {

thread_local int t_last_attempts = 0;

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

ParsedUrl parse_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw PreconditionError("endpoint must include a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) out.prefix = url.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

struct HttpBackend::Impl {
  HttpBackendConfig config;
  ParsedUrl url;
  std::counting_semaphore<1024> slots;

  explicit Impl(HttpBackendConfig c)
      : config(std::move(c)), url(parse_url(config.endpoint)), slots(std::clamp(config.parallelism, 1, 1024)) {}

  /// POSTs `body` to `path`, retrying transient failures. Returns the parsed JSON body.
  nlohmann::json post(const std::string& path, const nlohmann::json& body) {
    slots.acquire();
    struct Release {
      std::counting_semaphore<1024>& s;
      ~Release() { s.release(); }
    } release{slots};

    httplib::Client client(url.origin);
    const auto timeout = std::chrono::duration<double>(config.timeout_s);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    httplib::Headers headers;
    if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);

    const std::string payload = body.dump();
    const int max_attempts = std::max(0, config.max_retries) + 1;
    double backoff_ms = config.backoff_initial_ms;
    std::string last_error;
    int attempt = 0;
    while (attempt < max_attempts) {
      ++attempt;
      t_last_attempts = attempt;
      auto res = client.Post(url.prefix + path, headers, payload, "application/json");
      if (res && res->status >= 200 && res->status < 300) {
        try {
          return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
          last_error = std::string("malformed response body: ") + e.what();
        }
      } else if (res) {
        last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 512);
        if (!retryable_status(res->status)) {
          throw TransportError(describe() + " " + path + " failed: " + last_error, attempt);
        }
      } else {
        last_error = "connection error: " + httplib::to_string(res.error());
      }
      if (attempt < max_attempts) {
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(backoff_ms));
        backoff_ms = std::min<double>(backoff_ms * config.backoff_multiplier, config.backoff_max_ms);
      }
    }
    throw TransportError(describe() + " " + path + " failed after " + std::to_string(attempt) +
                             " attempts: " + last_error,
                         attempt);
  }

  std::string describe() const { return "http(" + config.endpoint + ", " + config.model + ")"; }
};

HttpBackend::HttpBackend(HttpBackendConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
HttpBackend::~HttpBackend() = default;

std::string HttpBackend::describe() const { return impl_->describe(); }

int HttpBackend::last_attempts() { return t_last_attempts; }

ChatResponse HttpBackend::complete(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
  }
  nlohmann::json body = {{"model", impl_->config.model},
                         {"messages", std::move(messages)},
                         {"temperature", request.temperature},
                         {"max_tokens", request.max_tokens}};
  if (request.seed) body["seed"] = *request.seed;

  const nlohmann::json reply = impl_->post("/chat/completions", body);
  ChatResponse response;
  try {
    const auto& choice = reply.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    response.text = content.is_string() ? content.get<std::string>() : std::string();
    response.finish_reason =
        choice.contains("finish_reason") && choice["finish_reason"].is_string()
            ? parse_finish_reason(choice["finish_reason"].get<std::string>())
            : FinishReason::Stop;
    if (reply.contains("usage") && reply["usage"].is_object()) {
      response.usage.prompt_tokens = reply["usage"].value("prompt_tokens", 0);
      response.usage.completion_tokens = reply["usage"].value("completion_tokens", 0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(describe() + ": unexpected response shape: " + e.what(), t_last_attempts);
  }
  return response;
}

std::vector<double> HttpBackend::embed(const std::string& text) {
  const auto& model = impl_->config.embedding_model.empty() ? impl_->config.model : impl_->config.embedding_model;
  const nlohmann::json reply = impl_->post("/embeddings", {{"model", model}, {"input", text}});
  try {
    return reply.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(describe() + ": unexpected embeddings shape: " + e.what(), t_last_attempts);
  }
}

}  // namespace evocounsel::gateway
