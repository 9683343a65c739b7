#include "evocounsel/skills/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/text.hpp"

namespace evocounsel::skills {

double token_set_cosine(std::string_view a, std::string_view b) {
  const auto ta = text::tokenize(a);
  const auto tb = text::tokenize(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  if (sa.empty() || sb.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  const double denom = std::sqrt(static_cast<double>(sa.size()) * static_cast<double>(sb.size()));
  return std::min(1.0, static_cast<double>(common) / denom);
}

double EmbeddingSimilarity::similarity(std::string_view a, std::string_view b) const {
  const std::string sa = text::trim(a), sb = text::trim(b);
  if (text::tokenize(sa) == text::tokenize(sb)) return 1.0;
  const auto ea = embedder_(sa);
  const auto eb = embedder_(sb);
  if (ea.size() != eb.size() || ea.empty()) throw Error("embedding dimension mismatch");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < ea.size(); ++i) {
    dot += ea[i] * eb[i];
    na += ea[i] * ea[i];
    nb += eb[i] * eb[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

}  // namespace evocounsel::skills
