#include "evocounsel/rollout/lifelong.hpp"

#include "evocounsel/common/errors.hpp"
#include "evocounsel/rollout/reward.hpp"
#include "evocounsel/rollout/selection.hpp"

namespace evocounsel::rollout {

std::string AblationFlags::tag() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(no_mape, "no_mape");
  add(no_see, "no_see");
  add(no_rie, "no_rie");
  return out.empty() ? "full" : out;
}

nlohmann::json AblationFlags::to_json() const {
  return {{"no_mape", no_mape}, {"no_see", no_see}, {"no_rie", no_rie}};
}

AblationFlags AblationFlags::from_json(const nlohmann::json& j) {
  return {j.value("no_mape", false), j.value("no_see", false), j.value("no_rie", false)};
}

skills::AtomicSkill generic_skill() {
  return {"generic.supportive_listening", "Supportive Listening",
          "Listen attentively, reflect the client's feelings and concerns, and respond with warmth and encouragement.",
          "Any point in the session.", ""};
}

std::string_view to_string(Selector s) {
  switch (s) {
    case Selector::Argmax: return "argmax";
    case Selector::Operator: return "operator";
    case Selector::Forced: return "forced";
  }
  return "argmax";
}

Selector parse_selector(std::string_view s) {
  if (s == "argmax") return Selector::Argmax;
  if (s == "operator") return Selector::Operator;
  if (s == "forced") return Selector::Forced;
  throw ParseError("unknown selector '" + std::string(s) + "'");
}

namespace {

template <class T, class F>
nlohmann::json opt_json(const std::optional<T>& v, F&& f) {
  return v ? f(*v) : nlohmann::json();
}

}  // namespace

nlohmann::json SessionRecord::to_json() const {
  nlohmann::json aggs = nlohmann::json::array();
  for (const auto& a : aggregates) aggs.push_back(a ? nlohmann::json(*a) : nlohmann::json());
  return {{"session_index", session_index},
          {"session_id", session_id},
          {"winner_index", winner_index},
          {"candidate_ids", candidate_ids},
          {"aggregates", std::move(aggs)},
          {"failed", failed},
          {"selector", to_string(selector)},
          {"argmax_index", argmax_index ? nlohmann::json(*argmax_index) : nlohmann::json()},
          {"tie", tie},
          {"memory_before_id", memory_before_id},
          {"memory_after_id", memory_after_id},
          {"tree_version_before", tree_version_before},
          {"tree_version_after", tree_version_after},
          {"delta", opt_json(delta, [](const auto& d) { return memory::to_json(d); })},
          {"summary", opt_json(summary, [](const auto& s) { return memory::to_json(s); })},
          {"skill_update", opt_json(skill_update, [](const auto& u) { return u.to_json(); })},
          {"warnings", warnings}};
}

SessionRecord SessionRecord::from_json(const nlohmann::json& j) {
  SessionRecord r;
  r.session_index = j.at("session_index").get<int>();
  r.session_id = j.at("session_id").get<std::string>();
  r.winner_index = j.at("winner_index").get<std::size_t>();
  r.candidate_ids = j.at("candidate_ids").get<std::vector<std::string>>();
  for (const auto& a : j.at("aggregates")) r.aggregates.push_back(a.is_null() ? std::nullopt : std::optional<double>(a.get<double>()));
  r.failed = j.at("failed").get<std::vector<bool>>();
  r.selector = parse_selector(j.at("selector").get<std::string>());
  if (!j.at("argmax_index").is_null()) r.argmax_index = j["argmax_index"].get<std::size_t>();
  r.tie = j.at("tie").get<bool>();
  r.memory_before_id = j.at("memory_before_id").get<std::string>();
  r.memory_after_id = j.at("memory_after_id").get<std::string>();
  r.tree_version_before = j.at("tree_version_before").get<int>();
  r.tree_version_after = j.at("tree_version_after").get<int>();
  if (!j.at("delta").is_null()) r.delta = memory::delta_from_json(j["delta"]);
  if (!j.at("summary").is_null()) r.summary = memory::summary_from_json(j["summary"]);
  if (!j.at("skill_update").is_null()) r.skill_update = skills::SkillUpdate::from_json(j["skill_update"]);
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

std::vector<memory::SftSessionSource> LifelongRun::sft_sources() const {
  std::vector<memory::SftSessionSource> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    memory::SftSessionSource s;
    s.session_id = rec.session_id;
    s.session_index = rec.session_index;
    if (i < winners.size()) s.transcript = winners[i].transcript;
    if (i < memories.size()) s.memory_before = memories[i];
    s.memory_extracted = !flags.no_mape;
    s.delta = rec.delta;
    s.summary = rec.summary;
    s.planned = !flags.no_mape;
    out.push_back(std::move(s));
  }
  return out;
}

LifelongRun start_run(std::string run_id, std::string config_digest, AblationFlags flags,
                      memory::MemoryState initial_memory, skills::SkillTree initial_tree) {
  LifelongRun run;
  run.run_id = std::move(run_id);
  run.config_digest = std::move(config_digest);
  run.flags = flags;
  if (flags.no_mape) initial_memory = {};
  run.memories.push_back(std::move(initial_memory));
  run.trees.push_back(std::move(initial_tree));
  return run;
}

Engine::Engine(EngineConfig config, EngineBackends backends, LifelongRun run)
    : config_(std::move(config)), backends_(std::move(backends)), run_(std::move(run)) {
  if (!backends_.counselor || !backends_.client || !backends_.judge || !backends_.extractor)
    throw PreconditionError("Engine: every backend must be configured");
  if (config_.sessions < 0) throw PreconditionError("Engine: sessions must be >= 0");
  if (config_.n_rollouts < 1) throw PreconditionError("Engine: n_rollouts must be >= 1");
  if (run_.memories.empty() || run_.trees.empty()) throw PreconditionError("Engine: run has no initial state");
  if (run_.memories.size() != run_.records.size() + 1 || run_.trees.size() != run_.records.size() + 1 ||
      run_.winners.size() != run_.records.size())
    throw PreconditionError("Engine: inconsistent run history");
  run_.flags = config_.flags;
}

std::uint64_t Engine::session_seed(int session_index) const {
  const int n = config_.flags.no_rie ? 1 : config_.n_rollouts;
  return config_.seed + static_cast<std::uint64_t>(session_index - 1) * static_cast<std::uint64_t>(n);
}

const PendingStep& Engine::prepare_step() {
  if (pending_) return *pending_;
  if (done()) throw PreconditionError("prepare_step: all sessions are complete");
  const int t = next_session();
  const auto& flags = config_.flags;

  RolloutOptions ro;
  ro.n = flags.no_rie ? 1 : config_.n_rollouts;
  ro.base_seed = session_seed(t);
  ro.turn_limit = config_.turn_limit;
  ro.parallelism = config_.parallelism;
  ro.plan = config_.plan;
  ro.retrieval = config_.retrieval;
  ro.generation = config_.generation;
  ro.client = config_.client_turn;
  ro.fixed_plan = flags.no_mape;
  if (flags.no_see) ro.fixed_skill = generic_skill();

  PendingStep step;
  step.session_index = t;
  step.base_seed = ro.base_seed;
  const RolloutBackends rb{*backends_.counselor, *backends_.client};
  try {
    step.candidates = rollout_session(rb, run_.memory(), run_.tree(), config_.card, t, ro);
  } catch (const std::exception& e) {
    throw RunAbort(std::string("session ") + std::to_string(t) + ": " + e.what(), t);
  }

  if (!flags.no_rie) {
    parallel_for(static_cast<int>(step.candidates.size()), config_.parallelism, [&](int k) {
      auto& c = step.candidates[static_cast<std::size_t>(k)];
      if (c.failed) return;
      try {
        c.reward = score_session(*backends_.judge, c.transcript, config_.rubric,
                                 candidate_call(t, c.candidate_index, c.seed), config_.judge);
      } catch (const std::exception& e) {
        c.failed = true;
        c.error = std::string("scoring: ") + e.what();
      }
    });
    try {
      step.argmax = select_best(std::span<const SessionCandidate>(step.candidates));
      step.tie = is_tie(step.candidates, *step.argmax);
    } catch (const SelectionError& e) {
      throw RunAbort(std::string("session ") + std::to_string(t) + ": " + e.what(), t);
    }
  }
  pending_ = std::move(step);
  return *pending_;
}

const SessionRecord& Engine::commit_step(std::optional<std::size_t> manual) {
  if (!pending_) throw PreconditionError("commit_step: no prepared step");
  const PendingStep& step = *pending_;
  const int t = step.session_index;

  std::size_t winner = 0;
  Selector selector = Selector::Argmax;
  if (manual) {
    if (*manual >= step.candidates.size()) throw PreconditionError("commit_step: candidate index out of range");
    if (step.candidates[*manual].failed) throw PreconditionError("commit_step: candidate " + step.candidates[*manual].id + " failed");
    winner = *manual;
    selector = Selector::Operator;
  } else if (step.argmax) {
    winner = *step.argmax;
  } else {
    // no judge: the single rollout is taken as is
    selector = Selector::Forced;
    winner = 0;
  }
  const SessionCandidate& w = step.candidates[winner];

  AdvanceOptions ao = config_.advance;
  ao.update_memory = !config_.flags.no_mape;
  ao.evolve_skills = !config_.flags.no_see;
  AdvanceResult adv;
  try {
    adv = advance_timeline(*backends_.extractor, run_.memory(), run_.tree(), w,
                           client::root_id_for(config_.card.therapy_school), ao);
  } catch (const std::exception& e) {
    throw RunAbort(e.what(), t);
  }

  SessionRecord rec;
  rec.session_index = t;
  rec.session_id = w.id;
  rec.winner_index = winner;
  for (const auto& c : step.candidates) {
    rec.candidate_ids.push_back(c.id);
    rec.aggregates.push_back(c.scored() ? std::optional<double>(c.reward->aggregate) : std::nullopt);
    rec.failed.push_back(c.failed);
  }
  rec.selector = selector;
  rec.argmax_index = step.argmax;
  rec.tie = step.tie;
  rec.memory_before_id = run_.memory().digest();
  rec.memory_after_id = adv.memory.digest();
  rec.tree_version_before = run_.tree().version;
  rec.tree_version_after = adv.tree.version;
  rec.delta = std::move(adv.delta);
  rec.summary = std::move(adv.summary);
  rec.skill_update = std::move(adv.update);
  rec.warnings = std::move(adv.warnings);
  for (const auto& c : step.candidates)
    for (const auto& ev : c.reward ? c.reward->clamp_events : std::vector<std::string>{})
      rec.warnings.push_back(c.id + ": " + ev);

  run_.memories.push_back(std::move(adv.memory));
  run_.trees.push_back(std::move(adv.tree));
  run_.winners.push_back(w);
  run_.records.push_back(std::move(rec));

  PendingStep done_step = std::move(*pending_);
  pending_.reset();
  if (hook_) hook_(run_, done_step, run_.records.back());
  return run_.records.back();
}

void Engine::run_to_end() {
  while (!done()) {
    prepare_step();
    commit_step();
  }
}

LifelongRun run_lifelong(const EngineConfig& config, const EngineBackends& backends, LifelongRun initial,
                         Engine::CommitHook hook) {
  Engine engine(config, backends, std::move(initial));
  if (hook) engine.on_commit(std::move(hook));
  engine.run_to_end();
  return engine.run();
}

}  // namespace evocounsel::rollout
