#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace evocounsel::client {

/// BT behavioral, CBT cognitive-behavioral, PMT postmodern,
/// HET humanistic-existential, PDT psychodynamic.
enum class TherapySchool { BT, CBT, PMT, HET, PDT };

std::string_view to_string(TherapySchool school);
std::optional<TherapySchool> parse_school(std::string_view code);
/// Id of the skill-tree Root for the school (lowercase code, e.g. "cbt").
std::string root_id_for(TherapySchool school);

/// Persona description that drives the simulated client.
struct ClientProfileCard {
  std::string card_id;
  std::map<std::string, std::string> demographics;
  std::string presenting_problem;
  TherapySchool therapy_school = TherapySchool::CBT;
  std::string personality_notes;
  double distress_baseline = 5.0;

  friend bool operator==(const ClientProfileCard&, const ClientProfileCard&) = default;

  std::vector<std::string> validate() const;
};

nlohmann::json to_json(const ClientProfileCard& card);
ClientProfileCard card_from_json(const nlohmann::json& j);

/// A JSON object, a JSON array of cards, or a directory of such files.
/// Throws ValidationError when any card is invalid.
std::vector<ClientProfileCard> load_cards(const std::filesystem::path& path);

std::filesystem::path default_cards_path();

}  // namespace evocounsel::client
