#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace evocounsel::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

/// "Family Status" / "family-status" / "FamilyStatus" -> "family_status".
std::string lower_snake(std::string_view s);

/// Lowercased alphanumeric runs; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view s);

bool contains(std::string_view haystack, std::string_view needle);

/// Replace every "{{key}}" occurrence using `lookup`; unknown keys are left as-is.
template <typename Lookup>
std::string substitute(std::string_view tmpl, Lookup&& lookup) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    auto open = tmpl.find("{{", i);
    if (open == std::string_view::npos) break;
    auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    out.append(tmpl.substr(i, open - i));
    std::string key(tmpl.substr(open + 2, close - open - 2));
    if (const std::string* value = lookup(key)) {
      out.append(*value);
    } else {
      out.append(tmpl.substr(open, close + 2 - open));
    }
    i = close + 2;
  }
  out.append(tmpl.substr(i));
  return out;
}

}  // namespace evocounsel::text
