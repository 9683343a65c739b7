#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace evocounsel {

/// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

/// Canonical serialization: compact, keys sorted (nlohmann::json objects are ordered maps).
std::string canonical_json(const nlohmann::json& value);

/// sha256_hex(canonical_json(value)). All content-addressed ids use this.
std::string json_digest(const nlohmann::json& value);

}  // namespace evocounsel
