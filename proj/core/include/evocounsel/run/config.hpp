#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/rollout/lifelong.hpp"

namespace evocounsel::run {

struct BackendConfig {
  std::string kind = "scripted";  // "scripted" | "http"
  std::string script;             // scripted: response script path
  std::string endpoint;           // http
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  std::string embedding_model;
  double timeout_s = 60.0;
  int max_retries = 3;
  int parallelism = 4;

  friend bool operator==(const BackendConfig&, const BackendConfig&) = default;
};

struct Temperatures {
  double plan = 0.0;
  double retrieval = 0.0;
  double generation = 0.7;
  double client = 0.7;
  double judge = 0.0;
  double extraction = 0.0;

  friend bool operator==(const Temperatures&, const Temperatures&) = default;
};

/// Everything a run needs. Paths are resolved against the config file's
/// directory on load, so a saved config is self-contained.
struct RunConfig {
  std::string run_id;  // empty: derived from the config digest
  BackendConfig counselor;
  BackendConfig client;
  BackendConfig judge;
  BackendConfig extractor;
  int n_rollouts = 8;
  int sessions = 3;
  int turn_limit = 20;
  double similarity_low = 0.30;
  double similarity_high = 0.90;
  std::string similarity_metric = "token_set_cosine";  // or "embedding"
  std::string rubric;      // empty: built-in four-dimension rubric
  std::string cards;       // empty: bundled sample cards
  std::string card_id;     // empty: first card
  std::string seed_tree;   // empty: bundled seed tree
  std::uint64_t seed = 0;
  rollout::AblationFlags flags;
  int max_repairs = 2;
  std::size_t summary_cap = 50;
  std::size_t max_objectives = 3;
  int parallelism = 4;
  bool history_masking = true;
  bool strict_judge = false;
  Temperatures temperatures;
  std::string output_dir;  // not part of the digest

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  /// Field-path messages, e.g. "n_rollouts: must be >= 1". Empty when valid.
  std::vector<std::string> validate() const;

  /// Without output_dir.
  nlohmann::json to_json() const;
  /// Throws ValidationError with field paths on wrong types or unknown keys.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

  std::string digest() const;
  std::string effective_run_id() const;
};

/// Parses, resolves and validates. Throws ParseError or ValidationError.
RunConfig load_config(const std::filesystem::path& path);

/// Points every backend at <dir>/<role>.json in scripted mode.
void apply_scripted_dir(RunConfig& config, const std::filesystem::path& dir);

}  // namespace evocounsel::run
