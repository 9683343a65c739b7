#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "evocounsel/memory/profile.hpp"
#include "evocounsel/skills/evolution.hpp"
#include "evocounsel/skills/skill_tree.hpp"

namespace evotest {

using Rng = std::mt19937_64;

/// Random valid four-level tree. Every Stage gets at least one Meta; Metas
/// may be empty so the sentinel path gets exercised.
evocounsel::skills::SkillTree random_tree(Rng& rng, int max_roots = 3);

/// Append (often with a colliding name) or Merge into a random Atomic.
evocounsel::skills::SkillUpdate random_update(Rng& rng, const evocounsel::skills::SkillTree& tree, int step);

/// Independent re-statement of the tree rules. Not built on validate_tree.
std::vector<std::string> oracle_tree_violations(const evocounsel::skills::SkillTree& tree);

/// Keys drawn from a small pool so upserts, removals and misses all collide.
evocounsel::memory::ClientProfile random_profile(Rng& rng, int current_session);
evocounsel::memory::ProfileDelta random_delta(Rng& rng);

std::vector<std::optional<double>> random_aggregates(Rng& rng, std::size_t len);

/// Lowest index of the maximum; nullopt when nothing is present.
std::optional<std::size_t> brute_argmax(const std::vector<std::optional<double>>& v);

}  // namespace evotest
