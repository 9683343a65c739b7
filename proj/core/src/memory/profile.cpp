#include "evocounsel/memory/profile.hpp"

#include <set>

#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/text.hpp"

namespace evocounsel::memory {

std::vector<std::string> ClientProfile::validate(SessionIndex current_session) const {
  std::vector<std::string> issues;
  for (const auto& [key, attr] : attributes) {
    if (key.empty() || key != text::lower_snake(key)) issues.push_back("attribute key '" + key + "' is not lower_snake_case");
    if (attr.last_updated < attr.first_seen) issues.push_back("attribute '" + key + "': last_updated < first_seen");
    if (attr.last_updated > current_session) issues.push_back("attribute '" + key + "': session index beyond current");
  }
  return issues;
}

ProfileDelta ProfileDelta::normalized() const {
  ProfileDelta out;
  for (const auto& [k, v] : upserts) out.upserts.emplace_back(text::lower_snake(k), v);
  for (const auto& k : removals) out.removals.push_back(text::lower_snake(k));
  out.narrative_patch = narrative_patch;
  return out;
}

std::vector<std::string> ProfileDelta::validate() const {
  std::vector<std::string> issues;
  const ProfileDelta n = normalized();
  std::set<std::string> up;
  for (const auto& [k, v] : n.upserts) {
    if (k.empty()) issues.push_back("upsert with empty key");
    else if (!up.insert(k).second) issues.push_back("duplicate upsert key '" + k + "'");
  }
  std::set<std::string> rm;
  for (const auto& k : n.removals) {
    if (k.empty()) issues.push_back("removal with empty key");
    else if (!rm.insert(k).second) issues.push_back("duplicate removal key '" + k + "'");
    if (up.count(k) != 0) issues.push_back("key '" + k + "' appears in both upserts and removals");
  }
  return issues;
}

ClientProfile update_profile(const ClientProfile& profile, const ProfileDelta& delta, SessionIndex session_index,
                             std::vector<std::string>* warnings) {
  if (auto issues = delta.validate(); !issues.empty()) throw ValidationError(std::move(issues));
  const ProfileDelta n = delta.normalized();
  ClientProfile out = profile;
  for (const auto& [key, value] : n.upserts) {
    auto it = out.attributes.find(key);
    if (it == out.attributes.end()) {
      out.attributes.emplace(key, ProfileAttribute{value, session_index, session_index});
    } else {
      it->second.value = value;
      it->second.last_updated = session_index;
    }
  }
  for (const auto& key : n.removals) {
    if (out.attributes.erase(key) == 0 && warnings != nullptr) {
      warnings->push_back("removal of unknown profile attribute '" + key + "' ignored");
    }
  }
  if (n.narrative_patch) out.free_text = *n.narrative_patch;
  return out;
}

nlohmann::json to_json(const ClientProfile& profile) {
  nlohmann::json attrs = nlohmann::json::object();
  for (const auto& [k, a] : profile.attributes) {
    attrs[k] = {{"value", a.value}, {"first_seen_session", a.first_seen}, {"last_updated_session", a.last_updated}};
  }
  return {{"profile_id", profile.profile_id}, {"attributes", std::move(attrs)}, {"free_text", profile.free_text}};
}

ClientProfile profile_from_json(const nlohmann::json& j) {
  ClientProfile p;
  p.profile_id = j.value("profile_id", "");
  p.free_text = j.value("free_text", "");
  if (j.contains("attributes")) {
    for (const auto& [k, a] : j.at("attributes").items()) {
      p.attributes[k] = ProfileAttribute{a.at("value").get<std::string>(), a.at("first_seen_session").get<int>(),
                                         a.at("last_updated_session").get<int>()};
    }
  }
  return p;
}

nlohmann::json to_json(const ProfileDelta& delta) {
  nlohmann::json upserts = nlohmann::json::array();
  for (const auto& [k, v] : delta.upserts) upserts.push_back({k, v});
  nlohmann::json j = {{"upserts", std::move(upserts)}, {"removals", delta.removals}};
  if (delta.narrative_patch) j["narrative_patch"] = *delta.narrative_patch;
  return j;
}

ProfileDelta delta_from_json(const nlohmann::json& j) {
  ProfileDelta d;
  for (const auto& pair : j.at("upserts")) {
    if (pair.is_array() && pair.size() == 2 && pair[0].is_string() && pair[1].is_string()) {
      d.upserts.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
    } else if (pair.is_object() && pair.contains("key") && pair.contains("value")) {
      d.upserts.emplace_back(pair["key"].get<std::string>(), pair["value"].get<std::string>());
    } else {
      throw ParseError("upserts entries must be [key, value] string pairs");
    }
  }
  for (const auto& key : j.at("removals")) {
    if (!key.is_string()) throw ParseError("removals entries must be strings");
    d.removals.push_back(key.get<std::string>());
  }
  if (j.contains("narrative_patch") && j["narrative_patch"].is_string()) {
    d.narrative_patch = j["narrative_patch"].get<std::string>();
  }
  return d;
}

}  // namespace evocounsel::memory
