#include "evocounsel/client/card.hpp"

#include <algorithm>

#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/files.hpp"
#include "evocounsel/common/text.hpp"

namespace evocounsel::client {

std::string_view to_string(TherapySchool school) {
  switch (school) {
    case TherapySchool::BT: return "BT";
    case TherapySchool::CBT: return "CBT";
    case TherapySchool::PMT: return "PMT";
    case TherapySchool::HET: return "HET";
    case TherapySchool::PDT: return "PDT";
  }
  return "CBT";
}

std::optional<TherapySchool> parse_school(std::string_view code) {
  for (auto s : {TherapySchool::BT, TherapySchool::CBT, TherapySchool::PMT, TherapySchool::HET, TherapySchool::PDT}) {
    if (text::iequals(code, to_string(s))) return s;
  }
  return std::nullopt;
}

std::string root_id_for(TherapySchool school) { return text::to_lower(to_string(school)); }

std::vector<std::string> ClientProfileCard::validate() const {
  std::vector<std::string> issues;
  if (card_id.empty()) issues.push_back("card_id: must be non-empty");
  if (presenting_problem.empty()) issues.push_back("card " + card_id + ": presenting_problem must be non-empty");
  if (distress_baseline < 1.0 || distress_baseline > 10.0) {
    issues.push_back("card " + card_id + ": distress_baseline must be in [1, 10]");
  }
  return issues;
}

nlohmann::json to_json(const ClientProfileCard& c) {
  return {{"card_id", c.card_id},
          {"demographics", c.demographics},
          {"presenting_problem", c.presenting_problem},
          {"therapy_school", to_string(c.therapy_school)},
          {"personality_notes", c.personality_notes},
          {"distress_baseline", c.distress_baseline}};
}

ClientProfileCard card_from_json(const nlohmann::json& j) {
  ClientProfileCard c;
  try {
    c.card_id = j.at("card_id").get<std::string>();
    if (j.contains("demographics")) {
      for (const auto& [k, v] : j["demographics"].items()) c.demographics[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    c.presenting_problem = j.value("presenting_problem", "");
    const auto school_code = j.at("therapy_school").get<std::string>();
    const auto school = parse_school(school_code);
    if (!school) throw ValidationError({"card " + c.card_id + ": therapy_school '" + school_code + "' is not one of BT, CBT, PMT, HET, PDT"});
    c.therapy_school = *school;
    c.personality_notes = j.value("personality_notes", "");
    c.distress_baseline = j.value("distress_baseline", 5.0);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("client card: " + std::string(e.what()));
  }
  if (auto issues = c.validate(); !issues.empty()) throw ValidationError(std::move(issues));
  return c;
}

std::vector<ClientProfileCard> load_cards(const std::filesystem::path& path) {
  std::vector<ClientProfileCard> out;
  auto load_one = [&](const std::filesystem::path& file) {
    const auto j = files::read_json(file);
    if (j.is_array()) {
      for (const auto& c : j) out.push_back(card_from_json(c));
    } else {
      out.push_back(card_from_json(j));
    }
  };
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> entries;
    for (const auto& e : std::filesystem::directory_iterator(path)) {
      if (e.path().extension() == ".json") entries.push_back(e.path());
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& e : entries) load_one(e);
  } else {
    load_one(path);
  }
  return out;
}

std::filesystem::path default_cards_path() { return std::filesystem::path(EVOCOUNSEL_DATA_DIR) / "cards" / "sample_cards.json"; }

}  // namespace evocounsel::client
