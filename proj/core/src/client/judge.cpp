#include "evocounsel/client/judge.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/files.hpp"
#include "evocounsel/common/text.hpp"
#include "evocounsel/gateway/structured.hpp"

namespace evocounsel::client {

std::vector<std::string> Rubric::validate() const {
  std::vector<std::string> issues;
  if (dimensions.empty()) issues.push_back("rubric.dimensions: must be non-empty");
  std::set<std::string> names;
  double total = 0;
  for (std::size_t i = 0; i < dimensions.size(); ++i) {
    const auto& d = dimensions[i];
    const std::string at = "rubric.dimensions[" + std::to_string(i) + "]";
    if (d.name.empty()) issues.push_back(at + ".name: must be non-empty");
    else if (!names.insert(d.name).second) issues.push_back(at + ".name: duplicate '" + d.name + "'");
    if (d.weight < 0) issues.push_back(at + ".weight: must be >= 0");
    total += std::max(0.0, d.weight);
  }
  if (!dimensions.empty() && total <= 0) issues.push_back("rubric: weights must not all be zero");
  return issues;
}

std::vector<std::vector<const RubricDimension*>> Rubric::groups() const {
  std::vector<std::vector<const RubricDimension*>> out;
  std::vector<std::string> keys;
  for (const auto& d : dimensions) {
    const std::string key = d.group.empty() ? d.name : d.group;
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(key);
      out.push_back({&d});
    } else {
      out[static_cast<std::size_t>(it - keys.begin())].push_back(&d);
    }
  }
  return out;
}

std::map<std::string, double> Rubric::normalized_weights() const {
  if (auto issues = validate(); !issues.empty()) throw ValidationError(std::move(issues));
  double total = 0;
  for (const auto& d : dimensions) total += d.weight;
  std::map<std::string, double> out;
  for (const auto& d : dimensions) out[d.name] = d.weight / total;
  return out;
}

Rubric Rubric::from_json(const nlohmann::json& j) {
  Rubric r;
  try {
    for (const auto& d : j.at("dimensions")) {
      RubricDimension dim;
      dim.name = d.at("name").get<std::string>();
      dim.definition = d.value("definition", "");
      dim.weight = d.value("weight", 1.0);
      const auto target = d.value("target", "counselor");
      if (target == "counselor") dim.target = DimensionTarget::Counselor;
      else if (target == "client") dim.target = DimensionTarget::Client;
      else throw ValidationError({"rubric dimension '" + dim.name + "': target must be counselor or client"});
      dim.group = d.value("group", "");
      r.dimensions.push_back(std::move(dim));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("rubric: ") + e.what());
  }
  if (auto issues = r.validate(); !issues.empty()) throw ValidationError(std::move(issues));
  return r;
}

Rubric Rubric::load(const std::filesystem::path& path) { return from_json(files::read_json(path)); }

nlohmann::json Rubric::to_json() const {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : dimensions) {
    nlohmann::json dj = {{"name", d.name},
                         {"definition", d.definition},
                         {"weight", d.weight},
                         {"target", d.target == DimensionTarget::Counselor ? "counselor" : "client"}};
    if (!d.group.empty()) dj["group"] = d.group;
    dims.push_back(std::move(dj));
  }
  return {{"dimensions", std::move(dims)}};
}

Rubric default_rubric() {
  return Rubric{{
      {"counselor_shared", "Counselor competencies common to all therapy schools: alliance, empathy, session structure and planning.", 1.0, DimensionTarget::Counselor, ""},
      {"counselor_specific", "Fidelity to the techniques of the client's therapy school.", 1.0, DimensionTarget::Counselor, ""},
      {"client_shared", "Client-side outcomes common to all schools: affect, engagement, perceived helpfulness.", 1.0, DimensionTarget::Client, ""},
      {"client_specific", "Client-side change on the outcomes targeted by the therapy school.", 1.0, DimensionTarget::Client, ""},
  }};
}

namespace {

std::optional<nlohmann::json> parse_bare_number(std::string_view raw, const std::string& dim) {
  const std::string t = text::trim(raw);
  double value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return nlohmann::json{{dim, value}};
}

std::string format_score(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

}  // namespace

JudgeResult judge_dimensions(gateway::Backend& backend, const memory::SessionTranscript& transcript,
                             const Rubric& rubric, const gateway::CallContext& call, const JudgeOptions& options) {
  if (rubric.dimensions.empty()) throw PreconditionError("judge_dimensions: rubric has no dimensions");
  if (transcript.turns.empty()) throw PreconditionError("judge_dimensions: empty transcript");

  JudgeResult result;
  const std::string dialogue = transcript.render_dialogue();
  for (const auto& group : rubric.groups()) {
    gateway::OutputSchema schema{"judge_scores", {}};
    std::string dims;
    for (const auto* d : group) {
      schema.fields.push_back({d->name, gateway::FieldKind::Real, true});
      dims += "- " + d->name + " (" + (d->target == DimensionTarget::Counselor ? "counselor" : "client") + "): " +
              d->definition + "\n";
    }
    std::string user = "Rate the counseling session below on each dimension from 1 (very poor) to 10 (excellent).\n"
                       "Dimensions:\n" + dims + "\nTranscript:\n" + dialogue + "\n" + gateway::format_instruction(schema);

    gateway::StructuredOptions so;
    so.max_repairs = options.task.max_repairs;
    if (group.size() == 1) {
      const std::string name = group.front()->name;
      so.fallback_parse = [name](std::string_view raw) { return parse_bare_number(raw, name); };
    }
    if (options.strict) {
      so.check = [&](const nlohmann::json& v) -> std::optional<std::string> {
        for (const auto* d : group) {
          const double s = v[d->name].get<double>();
          if (s < kMinScore || s > kMaxScore) return "score for " + d->name + " must be within [1, 10]";
        }
        return std::nullopt;
      };
    }
    nlohmann::json value;
    try {
      ++result.calls;
      value = gateway::complete_structured(
          backend,
          call.request("judge",
                       {{gateway::Role::System, "You are an expert clinical supervisor evaluating counseling sessions."},
                        {gateway::Role::User, std::move(user)}},
                       options.task),
          schema, so);
    } catch (const StructuredOutputError& e) {
      throw ScoringError(std::string("judge_dimensions: ") + e.what());
    }
    for (const auto* d : group) {
      const double raw = value[d->name].get<double>();
      const double clamped = std::clamp(raw, kMinScore, kMaxScore);
      if (clamped != raw) {
        result.clamp_events.push_back("dimension " + d->name + ": score " + format_score(raw) + " clamped to " +
                                      format_score(clamped));
      }
      result.scores[d->name] = clamped;
    }
  }
  return result;
}

}  // namespace evocounsel::client
