#pragma once

#include <memory>

#include "evocounsel/gateway/gateway_log.hpp"
#include "evocounsel/rollout/lifelong.hpp"
#include "evocounsel/run/config.hpp"
#include "evocounsel/skills/similarity.hpp"

namespace evocounsel::run {

/// The four role backends, each wrapped so every call lands in `log`.
struct RunBackends {
  rollout::EngineBackends roles;
  std::shared_ptr<gateway::GatewayLog> log;
  std::shared_ptr<skills::SimilarityMetric> metric;
};

/// Scripted backends load their script; http backends read the API key from
/// the configured environment variable (ValidationError when unset).
RunBackends make_backends(const RunConfig& config);

gateway::BackendHandle make_backend(const BackendConfig& config, const std::string& role);

/// Engine settings derived from the config, the chosen card and rubric.
rollout::EngineConfig engine_config(const RunConfig& config, const client::ClientProfileCard& card,
                                    const client::Rubric& rubric, const skills::SimilarityMetric* metric);

client::ClientProfileCard select_card(const RunConfig& config);
client::Rubric load_rubric(const RunConfig& config);
skills::SkillTree load_seed_tree(const RunConfig& config);

}  // namespace evocounsel::run
