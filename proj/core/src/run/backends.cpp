#include "evocounsel/run/backends.hpp"

#include <cstdlib>

#include "evocounsel/common/errors.hpp"
#include "evocounsel/gateway/http_backend.hpp"
#include "evocounsel/gateway/scripted.hpp"

namespace evocounsel::run {

gateway::BackendHandle make_backend(const BackendConfig& config, const std::string& role) {
  if (config.kind == "scripted") {
    return std::make_shared<gateway::ScriptedBackend>(gateway::ResponseScript::load(config.script));
  }
  gateway::HttpBackendConfig hc;
  hc.endpoint = config.endpoint;
  hc.model = config.model;
  hc.embedding_model = config.embedding_model;
  hc.timeout_s = config.timeout_s;
  hc.max_retries = config.max_retries;
  hc.parallelism = config.parallelism;
  if (!config.api_key_env.empty()) {
    const char* key = std::getenv(config.api_key_env.c_str());
    if (!key || !*key)
      throw ValidationError({"backends." + role + ".api_key_env: environment variable " + config.api_key_env + " is not set"});
    hc.api_key = key;
  }
  return std::make_shared<gateway::HttpBackend>(std::move(hc));
}

RunBackends make_backends(const RunConfig& config) {
  RunBackends out;
  out.log = std::make_shared<gateway::GatewayLog>();
  auto wrap = [&](const BackendConfig& b, const std::string& role) -> gateway::BackendHandle {
    return std::make_shared<gateway::LoggingBackend>(make_backend(b, role), role, out.log);
  };
  out.roles.counselor = wrap(config.counselor, "counselor");
  out.roles.client = wrap(config.client, "client");
  out.roles.judge = wrap(config.judge, "judge");
  out.roles.extractor = wrap(config.extractor, "extractor");

  if (config.similarity_metric == "embedding") {
    auto inner = std::static_pointer_cast<gateway::LoggingBackend>(out.roles.extractor)->inner();
    auto http = std::dynamic_pointer_cast<gateway::HttpBackend>(inner);
    if (!http) throw ValidationError({"similarity.metric: 'embedding' needs an http extractor backend"});
    out.metric = std::make_shared<skills::EmbeddingSimilarity>([http](const std::string& t) { return http->embed(t); });
  } else {
    out.metric = std::make_shared<skills::TokenSetCosine>();
  }
  return out;
}

rollout::EngineConfig engine_config(const RunConfig& config, const client::ClientProfileCard& card,
                                    const client::Rubric& rubric, const skills::SimilarityMetric* metric) {
  rollout::EngineConfig ec;
  ec.sessions = config.sessions;
  ec.n_rollouts = config.n_rollouts;
  ec.turn_limit = config.turn_limit;
  ec.seed = config.seed;
  ec.parallelism = config.parallelism;
  ec.flags = config.flags;
  ec.card = card;
  ec.rubric = rubric;
  auto task = [&](double temperature) {
    gateway::TaskOptions t;
    t.temperature = temperature;
    t.max_repairs = config.max_repairs;
    return t;
  };
  ec.judge.strict = config.strict_judge;
  ec.judge.task = task(config.temperatures.judge);
  ec.plan.max_objectives = config.max_objectives;
  ec.plan.task = task(config.temperatures.plan);
  ec.retrieval = task(config.temperatures.retrieval);
  ec.generation = task(config.temperatures.generation);
  ec.client_turn = task(config.temperatures.client);
  ec.advance.summary_cap = config.summary_cap;
  ec.advance.thresholds = {config.similarity_low, config.similarity_high};
  ec.advance.metric = metric;
  ec.advance.extraction = task(config.temperatures.extraction);
  ec.advance.summary = task(config.temperatures.extraction);
  ec.advance.skill = task(config.temperatures.extraction);
  return ec;
}

client::ClientProfileCard select_card(const RunConfig& config) {
  const auto cards = client::load_cards(config.cards.empty() ? client::default_cards_path() : std::filesystem::path(config.cards));
  if (cards.empty()) throw ValidationError({"client.cards: no cards found"});
  if (config.card_id.empty()) return cards.front();
  for (const auto& c : cards)
    if (c.card_id == config.card_id) return c;
  throw ValidationError({"client.card_id: no card with id '" + config.card_id + "'"});
}

client::Rubric load_rubric(const RunConfig& config) {
  return config.rubric.empty() ? client::default_rubric() : client::Rubric::load(config.rubric);
}

skills::SkillTree load_seed_tree(const RunConfig& config) {
  return skills::load_tree(config.seed_tree.empty() ? skills::default_seed_tree_path() : std::filesystem::path(config.seed_tree));
}

}  // namespace evocounsel::run
