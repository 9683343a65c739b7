#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evocounsel/gateway/chat.hpp"

namespace evocounsel::gateway {

/// Sampling and repair knobs for one kind of sub-task.
struct TaskOptions {
  double temperature = 0.0;
  int max_tokens = 1024;
  int max_repairs = 2;
};

/// Routing metadata threaded through every backend-bound operation.
struct CallContext {
  std::map<std::string, std::string> labels;
  std::optional<std::uint64_t> seed;

  ChatRequest request(std::string tag, std::vector<Message> messages, const TaskOptions& options) const {
    ChatRequest r;
    r.messages = std::move(messages);
    r.temperature = options.temperature;
    r.max_tokens = options.max_tokens;
    r.tag = std::move(tag);
    r.seed = seed;
    r.labels = labels;
    return r;
  }

  CallContext with(const std::string& key, std::string value) const {
    CallContext copy = *this;
    copy.labels[key] = std::move(value);
    return copy;
  }
};

}  // namespace evocounsel::gateway
