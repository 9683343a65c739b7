#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/gateway/call_context.hpp"
#include "evocounsel/gateway/chat.hpp"
#include "evocounsel/memory/transcript.hpp"

namespace evocounsel::client {

enum class DimensionTarget { Counselor, Client };

struct RubricDimension {
  std::string name;
  std::string definition;
  double weight = 1.0;
  DimensionTarget target = DimensionTarget::Counselor;
  /// Dimensions sharing a group are scored in one judge call. Defaults to the name.
  std::string group;

  friend bool operator==(const RubricDimension&, const RubricDimension&) = default;
};

struct Rubric {
  std::vector<RubricDimension> dimensions;

  friend bool operator==(const Rubric&, const Rubric&) = default;

  std::vector<std::string> validate() const;
  /// Groups in order of first appearance.
  std::vector<std::vector<const RubricDimension*>> groups() const;
  /// Weights rescaled to sum to 1 (ValidationError if they are all zero).
  std::map<std::string, double> normalized_weights() const;

  /// {dimensions:[{name, definition, weight, target, group?}]}
  static Rubric from_json(const nlohmann::json& j);
  static Rubric load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

/// Four equally weighted dimensions: counselor/client x shared/specific.
Rubric default_rubric();

inline constexpr double kMinScore = 1.0;
inline constexpr double kMaxScore = 10.0;

struct JudgeOptions {
  /// Strict mode rejects out-of-range scores (and asks for a repair) instead of clamping.
  bool strict = false;
  gateway::TaskOptions task{};
};

struct JudgeResult {
  std::map<std::string, double> scores;
  std::vector<std::string> clamp_events;
  int calls = 0;
};

/// Scores every rubric dimension in [1, 10], one judge call per group.
/// A bare number reply is accepted for single-dimension groups.
JudgeResult judge_dimensions(gateway::Backend& backend, const memory::SessionTranscript& transcript,
                             const Rubric& rubric, const gateway::CallContext& call = {},
                             const JudgeOptions& options = {});

}  // namespace evocounsel::client
