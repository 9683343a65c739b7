#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace evocounsel::memory {

using SessionIndex = int;

struct ProfileAttribute {
  std::string value;
  SessionIndex first_seen = 0;
  SessionIndex last_updated = 0;

  friend bool operator==(const ProfileAttribute&, const ProfileAttribute&) = default;
};

/// Evolving client profile: free-form attributes keyed by lower_snake_case
/// names, each stamped with the sessions that introduced and last touched it.
struct ClientProfile {
  std::string profile_id;
  std::map<std::string, ProfileAttribute> attributes;
  std::string free_text;

  friend bool operator==(const ClientProfile&, const ClientProfile&) = default;

  /// Structural issues; `current_session` bounds the stored indices.
  std::vector<std::string> validate(SessionIndex current_session) const;
};

struct ProfileDelta {
  std::vector<std::pair<std::string, std::string>> upserts;
  std::vector<std::string> removals;
  std::optional<std::string> narrative_patch;

  friend bool operator==(const ProfileDelta&, const ProfileDelta&) = default;

  bool empty() const { return upserts.empty() && removals.empty() && !narrative_patch; }
  /// Keys normalized; structural issues (key in both lists, duplicate keys, empty keys).
  std::vector<std::string> validate() const;
  ProfileDelta normalized() const;
};

/// Applies `delta` at `session_index`. Pure.
///
/// Upserted keys get last_updated = session_index (first_seen kept when the key
/// already existed). Removing a missing key is a no-op recorded in `warnings`.
/// A narrative patch replaces the narrative, so applying the same delta twice
/// is idempotent. Throws ValidationError on an invalid delta.
ClientProfile update_profile(const ClientProfile& profile, const ProfileDelta& delta, SessionIndex session_index,
                             std::vector<std::string>* warnings = nullptr);

nlohmann::json to_json(const ClientProfile& profile);
ClientProfile profile_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProfileDelta& delta);
ProfileDelta delta_from_json(const nlohmann::json& j);

}  // namespace evocounsel::memory
