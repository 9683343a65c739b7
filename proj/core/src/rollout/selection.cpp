#include "evocounsel/rollout/selection.hpp"

#include <vector>

#include "evocounsel/common/errors.hpp"

namespace evocounsel::rollout {

std::size_t select_best(std::span<const std::optional<double>> aggregates) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < aggregates.size(); ++i) {
    if (!aggregates[i]) continue;
    // strict > keeps the earliest index on ties
    if (!best || *aggregates[i] > *aggregates[*best]) best = i;
  }
  if (!best) throw SelectionError("select_best: no scored candidates");
  return *best;
}

std::size_t select_best(std::span<const double> aggregates) {
  std::vector<std::optional<double>> v(aggregates.begin(), aggregates.end());
  return select_best(std::span<const std::optional<double>>(v));
}

std::size_t select_best(std::span<const SessionCandidate> candidates) {
  std::vector<std::optional<double>> v;
  v.reserve(candidates.size());
  for (const auto& c : candidates) v.push_back(c.scored() ? std::optional<double>(c.reward->aggregate) : std::nullopt);
  return select_best(std::span<const std::optional<double>>(v));
}

bool is_tie(std::span<const SessionCandidate> candidates, std::size_t winner) {
  if (winner >= candidates.size() || !candidates[winner].scored()) return false;
  const double best = candidates[winner].reward->aggregate;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (i != winner && candidates[i].scored() && candidates[i].reward->aggregate == best) return true;
  return false;
}

}  // namespace evocounsel::rollout
