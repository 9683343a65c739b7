#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace evocounsel::files {

std::string read_text(const std::filesystem::path& path);
/// Writes via a sibling temp file + rename; creates parent directories.
void write_text(const std::filesystem::path& path, const std::string& contents);

nlohmann::json read_json(const std::filesystem::path& path);
/// Pretty-printed (2-space) JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

/// Lines starting with '#' and blank lines are skipped.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
std::string to_jsonl(const std::vector<nlohmann::json>& records);

}  // namespace evocounsel::files
