#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "evocounsel/rollout/candidate.hpp"

namespace evocounsel::rollout {

/// argmax over the present aggregates; ties go to the lowest index and
/// nullopt entries (failed or unscored) are skipped. SelectionError if none.
std::size_t select_best(std::span<const std::optional<double>> aggregates);
std::size_t select_best(std::span<const double> aggregates);
/// S_t* over scored candidates. Returns a position in `candidates`.
std::size_t select_best(std::span<const SessionCandidate> candidates);

/// True when another scored candidate has the same aggregate as `winner`.
bool is_tie(std::span<const SessionCandidate> candidates, std::size_t winner);

}  // namespace evocounsel::rollout
