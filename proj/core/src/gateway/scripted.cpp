#include "evocounsel/gateway/scripted.hpp"

#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/files.hpp"
#include "evocounsel/common/text.hpp"

namespace evocounsel::gateway {

bool ScriptEntry::matches(const ChatRequest& request) const {
  if (!tag.empty() && tag != request.tag) return false;
  for (const auto& [key, value] : labels) {
    auto it = request.labels.find(key);
    if (it == request.labels.end() || it->second != value) return false;
  }
  if (!contains.empty()) {
    const std::string prompt = request.prompt_text();
    for (const auto& needle : contains) {
      if (!text::contains(prompt, needle)) return false;
    }
  }
  return true;
}

ResponseScript ResponseScript::from_json(const nlohmann::json& j) {
  ResponseScript script;
  const std::string mode = j.value("mode", "by_tag");
  if (mode == "by_tag") script.mode = ScriptMode::ByTag;
  else if (mode == "sequential") script.mode = ScriptMode::Sequential;
  else throw ParseError("script mode must be by_tag or sequential, got '" + mode + "'");
  if (!j.contains("entries") || !j["entries"].is_array()) throw ParseError("script: 'entries' array required");
  std::size_t index = 0;
  for (const auto& e : j["entries"]) {
    ScriptEntry entry;
    entry.tag = e.value("tag", "");
    if (e.contains("contains")) {
      if (e["contains"].is_string()) entry.contains.push_back(e["contains"].get<std::string>());
      else entry.contains = e["contains"].get<std::vector<std::string>>();
    }
    if (e.contains("labels")) {
      for (const auto& [k, v] : e["labels"].items()) {
        entry.labels[k] = v.is_string() ? v.get<std::string>() : v.dump();
      }
    }
    if (!e.contains("response")) {
      throw ParseError("script entry " + std::to_string(index) + ": 'response' required");
    }
    entry.response = e["response"].is_string() ? e["response"].get<std::string>() : e["response"].dump();
    entry.finish_reason = parse_finish_reason(e.value("finish_reason", "stop"));
    script.entries.push_back(std::move(entry));
    ++index;
  }
  return script;
}

ResponseScript ResponseScript::load(const std::filesystem::path& path) {
  try {
    return from_json(files::read_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

nlohmann::json ResponseScript::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : this->entries) {
    nlohmann::json out = {{"response", e.response}};
    if (!e.tag.empty()) out["tag"] = e.tag;
    if (!e.contains.empty()) out["contains"] = e.contains;
    if (!e.labels.empty()) out["labels"] = e.labels;
    if (e.finish_reason != FinishReason::Stop) out["finish_reason"] = gateway::to_string(e.finish_reason);
    entries.push_back(std::move(out));
  }
  return {{"mode", mode == ScriptMode::ByTag ? "by_tag" : "sequential"}, {"entries", std::move(entries)}};
}

ScriptedBackend::ScriptedBackend(ResponseScript script, std::string name)
    : script_(std::move(script)), name_(std::move(name)) {}

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
  const ScriptEntry* entry = nullptr;
  {
    std::lock_guard lock(mu_);
    if (script_.mode == ScriptMode::Sequential) {
      if (cursor_ >= script_.entries.size()) {
        throw ScriptError(name_ + ": sequential script exhausted after " + std::to_string(cursor_) +
                          " entries (request tag '" + request.tag + "')");
      }
      entry = &script_.entries[cursor_];
      if (!entry->tag.empty() && entry->tag != request.tag) {
        throw ScriptError(name_ + ": sequential entry " + std::to_string(cursor_) + " expects tag '" +
                          entry->tag + "' but request tag is '" + request.tag + "'");
      }
      ++cursor_;
    } else {
      for (const auto& e : script_.entries) {
        if (e.matches(request)) {
          entry = &e;
          break;
        }
      }
      if (entry == nullptr) throw ScriptError(name_ + ": no script entry matches tag '" + request.tag + "'");
    }
    ++per_tag_[request.tag];
  }
  ++calls_;

  const std::string seed = request.seed ? std::to_string(*request.seed) : std::string();
  auto lookup = [&](const std::string& key) -> const std::string* {
    if (key == "tag") return &request.tag;
    if (key == "seed") return request.seed ? &seed : nullptr;
    auto it = request.labels.find(key);
    return it == request.labels.end() ? nullptr : &it->second;
  };
  ChatResponse response;
  response.text = text::substitute(entry->response, lookup);
  response.finish_reason = entry->finish_reason;
  response.usage.prompt_tokens = static_cast<int>(request.prompt_text().size() / 4);
  response.usage.completion_tokens = static_cast<int>(response.text.size() / 4);
  return response;
}

std::size_t ScriptedBackend::calls_with_tag(const std::string& tag) const {
  std::lock_guard lock(mu_);
  auto it = per_tag_.find(tag);
  return it == per_tag_.end() ? 0 : it->second;
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  return script_.mode == ScriptMode::Sequential ? script_.entries.size() - cursor_ : script_.entries.size();
}

}  // namespace evocounsel::gateway
