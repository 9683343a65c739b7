#include "evocounsel/gateway/structured.hpp"

#include <set>

#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/text.hpp"

namespace evocounsel::gateway {

std::string_view to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::String: return "string";
    case FieldKind::Integer: return "integer";
    case FieldKind::Real: return "real";
    case FieldKind::Boolean: return "boolean";
    case FieldKind::List: return "list";
    case FieldKind::Object: return "object";
  }
  return "string";
}

void OutputSchema::validate_self() const {
  std::set<std::string> seen;
  for (const auto& f : fields) {
    if (f.name.empty()) throw PreconditionError("schema '" + name + "': empty field name");
    if (!seen.insert(f.name).second) throw PreconditionError("schema '" + name + "': duplicate field " + f.name);
  }
}

std::string OutputSchema::describe() const {
  std::string out = "{";
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out += ", ";
    first = false;
    out += "\"" + f.name + "\": " + std::string(to_string(f.kind));
    if (!f.required) out += " (optional)";
  }
  return out + "}";
}

std::string format_instruction(const OutputSchema& schema) {
  return "Reply with a single JSON object and nothing else, shaped as " + schema.describe() + ".";
}

namespace {

bool kind_matches(FieldKind kind, const nlohmann::json& v) {
  switch (kind) {
    case FieldKind::String: return v.is_string();
    case FieldKind::Integer:
      return v.is_number_integer() || (v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>())));
    case FieldKind::Real: return v.is_number();
    case FieldKind::Boolean: return v.is_boolean();
    case FieldKind::List: return v.is_array();
    case FieldKind::Object: return v.is_object();
  }
  return false;
}

std::optional<nlohmann::json> try_parse(std::string_view text) {
  auto parsed = nlohmann::json::parse(text.begin(), text.end(), nullptr, false);
  if (parsed.is_discarded()) return std::nullopt;
  return parsed;
}

}  // namespace

std::optional<std::string> check_conformance(const OutputSchema& schema, const nlohmann::json& value) {
  if (!value.is_object()) return "expected a JSON object for " + schema.name;
  for (const auto& f : schema.fields) {
    auto it = value.find(f.name);
    if (it == value.end() || it->is_null()) {
      if (f.required) return "missing required field '" + f.name + "'";
      continue;
    }
    if (!kind_matches(f.kind, *it)) {
      return "field '" + f.name + "' must be " + std::string(to_string(f.kind));
    }
  }
  return std::nullopt;
}

std::optional<nlohmann::json> extract_json(std::string_view raw) {
  const std::string trimmed = text::trim(raw);
  if (auto whole = try_parse(trimmed); whole && (whole->is_object() || whole->is_array())) return whole;

  if (auto fence = trimmed.find("```"); fence != std::string::npos) {
    auto body_start = trimmed.find('\n', fence);
    auto fence_end = body_start == std::string::npos ? std::string::npos : trimmed.find("```", body_start);
    if (fence_end != std::string::npos) {
      if (auto inner = try_parse(std::string_view(trimmed).substr(body_start + 1, fence_end - body_start - 1))) {
        return inner;
      }
    }
  }
  auto open = trimmed.find('{');
  auto close = trimmed.rfind('}');
  if (open != std::string::npos && close != std::string::npos && close > open) {
    if (auto span = try_parse(std::string_view(trimmed).substr(open, close - open + 1))) return span;
  }
  return std::nullopt;
}

StructuredValue complete_structured(Backend& backend, ChatRequest request, const OutputSchema& schema,
                                    const StructuredOptions& options) {
  schema.validate_self();
  const int attempts = std::max(0, options.max_repairs) + 1;
  std::string last_raw;
  std::string last_error;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      request.messages.push_back({Role::Assistant, last_raw});
      request.messages.push_back(
          {Role::User, "Your previous reply was rejected: " + last_error + ". " + format_instruction(schema)});
      request.labels["repair"] = std::to_string(attempt);
    }
    ChatResponse response = complete(backend, request);
    last_raw = response.text;

    std::optional<nlohmann::json> value = extract_json(response.text);
    if (!value && options.fallback_parse) value = options.fallback_parse(response.text);
    if (!value) {
      last_error = "reply is not valid JSON";
      continue;
    }
    if (auto err = check_conformance(schema, *value)) {
      last_error = *err;
      continue;
    }
    if (options.check) {
      if (auto err = options.check(*value)) {
        last_error = *err;
        continue;
      }
    }
    return *value;
  }
  throw StructuredOutputError(schema.name + ": non-conforming output after " + std::to_string(attempts) +
                                  " attempt(s): " + last_error,
                              last_raw);
}

}  // namespace evocounsel::gateway
