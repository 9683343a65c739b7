#include "evocounsel/gateway/gateway_log.hpp"

#include <algorithm>
#include <chrono>

namespace evocounsel::gateway {

nlohmann::json GatewayLogEntry::to_json() const {
  nlohmann::json j = {{"backend", backend},
                      {"scope", scope},
                      {"tag", tag},
                      {"request_digest", request_digest},
                      {"response", response_text},
                      {"finish_reason", finish_reason},
                      {"latency_ms", latency_ms}};
  if (!error.empty()) j["error"] = error;
  return j;
}

void GatewayLog::record(GatewayLogEntry entry) {
  std::lock_guard lock(mu_);
  entry.seq = next_seq_++;
  all_tags_.push_back(entry.tag);
  pending_.push_back(std::move(entry));
}

std::vector<GatewayLogEntry> GatewayLog::drain() {
  std::vector<GatewayLogEntry> out;
  {
    std::lock_guard lock(mu_);
    out.swap(pending_);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.scope != b.scope) return a.scope < b.scope;
    return a.seq < b.seq;
  });
  return out;
}

std::size_t GatewayLog::total_recorded() const {
  std::lock_guard lock(mu_);
  return all_tags_.size();
}

std::size_t GatewayLog::count_tag(const std::string& tag) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count(all_tags_.begin(), all_tags_.end(), tag));
}

ChatResponse LoggingBackend::complete(const ChatRequest& request) {
  GatewayLogEntry entry;
  entry.backend = name_;
  if (auto it = request.labels.find("scope"); it != request.labels.end()) entry.scope = it->second;
  entry.tag = request.tag;
  entry.request_digest = request_digest(request);
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&] {
    entry.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    log_->record(entry);
  };
  try {
    ChatResponse response = inner_->complete(request);
    entry.response_text = response.text;
    entry.finish_reason = std::string(to_string(response.finish_reason));
    finish();
    return response;
  } catch (const std::exception& e) {
    entry.finish_reason = "error";
    entry.error = e.what();
    finish();
    throw;
  }
}

}  // namespace evocounsel::gateway
