#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/gateway/chat.hpp"

namespace evocounsel::gateway {

enum class FieldKind { String, Integer, Real, Boolean, List, Object };

std::string_view to_string(FieldKind kind);

struct FieldSpec {
  std::string name;
  FieldKind kind = FieldKind::String;
  bool required = true;
};

/// Shape of the JSON object a structured sub-task must return.
struct OutputSchema {
  std::string name;
  std::vector<FieldSpec> fields;

  /// Throws PreconditionError on duplicate or empty field names.
  void validate_self() const;
  /// Prompt-ready description, e.g. `{"stage": string, "objectives": list}`.
  std::string describe() const;
};

using StructuredValue = nlohmann::json;

/// Returns a human-readable error, or nullopt when `value` conforms.
std::optional<std::string> check_conformance(const OutputSchema& schema, const nlohmann::json& value);

/// Finds a JSON value in free model text: the whole text, a ```json fence,
/// or the outermost {...} span.
std::optional<nlohmann::json> extract_json(std::string_view text);

/// Domain-level check layered on top of the schema (enum membership, non-empty
/// strings, ...). Returns an error message or nullopt.
using SemanticCheck = std::function<std::optional<std::string>(const nlohmann::json&)>;

struct StructuredOptions {
  int max_repairs = 2;
  SemanticCheck check;
  /// Consulted when no JSON can be extracted (e.g. a bare number reply).
  std::function<std::optional<nlohmann::json>(std::string_view)> fallback_parse;
};

/// Runs `request`, parses and validates the reply against `schema`. On failure
/// the raw reply and the validator error are appended to the conversation and
/// the backend is asked again, at most `options.max_repairs` times.
///
/// Throws StructuredOutputError (carrying the last raw text) when every
/// attempt fails.
StructuredValue complete_structured(Backend& backend, ChatRequest request, const OutputSchema& schema,
                                    const StructuredOptions& options = {});

/// Standard trailing instruction for structured prompts.
std::string format_instruction(const OutputSchema& schema);

}  // namespace evocounsel::gateway
