#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/client/card.hpp"
#include "evocounsel/client/judge.hpp"
#include "evocounsel/gateway/chat.hpp"
#include "evocounsel/memory/memory_state.hpp"
#include "evocounsel/memory/sft.hpp"
#include "evocounsel/rollout/candidate.hpp"
#include "evocounsel/rollout/rollout.hpp"
#include "evocounsel/rollout/timeline.hpp"
#include "evocounsel/skills/evolution.hpp"
#include "evocounsel/skills/skill_tree.hpp"

namespace evocounsel::rollout {

/// Component switches mirroring the ablation study.
struct AblationFlags {
  bool no_mape = false;  // empty memory, fixed generic plan
  bool no_see = false;   // one fixed generic skill, no tree evolution
  bool no_rie = false;   // a single rollout, no judge

  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;

  /// "full", or the set flags joined with '+', e.g. "no_mape+no_see".
  std::string tag() const;
  nlohmann::json to_json() const;
  static AblationFlags from_json(const nlohmann::json& j);
};

/// Directive used for every counselor turn when skill evolution is ablated.
/// It is deliberately not a tree node.
skills::AtomicSkill generic_skill();

enum class Selector { Argmax, Operator, Forced };

std::string_view to_string(Selector s);
Selector parse_selector(std::string_view s);

/// Per-session entry of the run log.
struct SessionRecord {
  int session_index = 0;
  std::string session_id;  // winning candidate id
  std::size_t winner_index = 0;
  std::vector<std::string> candidate_ids;
  std::vector<std::optional<double>> aggregates;
  std::vector<bool> failed;
  Selector selector = Selector::Argmax;
  std::optional<std::size_t> argmax_index;
  bool tie = false;
  std::string memory_before_id;
  std::string memory_after_id;
  int tree_version_before = 0;
  int tree_version_after = 0;
  std::optional<memory::ProfileDelta> delta;
  std::optional<memory::SessionSummary> summary;
  std::optional<skills::SkillUpdate> skill_update;
  std::vector<std::string> warnings;

  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;

  nlohmann::json to_json() const;
  static SessionRecord from_json(const nlohmann::json& j);
};

/// T* and everything derived from it. memories[t] and trees[t] are the
/// state after t sessions; index 0 holds the initial state.
struct LifelongRun {
  std::string run_id;
  std::string config_digest;
  AblationFlags flags;
  std::vector<SessionRecord> records;
  std::vector<memory::MemoryState> memories;
  std::vector<skills::SkillTree> trees;
  std::vector<SessionCandidate> winners;

  int completed() const { return static_cast<int>(records.size()); }
  const memory::MemoryState& memory() const { return memories.back(); }
  const skills::SkillTree& tree() const { return trees.back(); }

  std::vector<memory::SftSessionSource> sft_sources() const;
};

LifelongRun start_run(std::string run_id, std::string config_digest, AblationFlags flags,
                      memory::MemoryState initial_memory, skills::SkillTree initial_tree);

struct EngineConfig {
  int sessions = 0;
  int n_rollouts = 8;
  int turn_limit = 20;
  std::uint64_t seed = 0;
  int parallelism = 1;
  AblationFlags flags;
  client::ClientProfileCard card;
  client::Rubric rubric = client::default_rubric();
  client::JudgeOptions judge{};
  memory::PlanOptions plan{};
  gateway::TaskOptions retrieval{};
  gateway::TaskOptions generation{};
  gateway::TaskOptions client_turn{};
  AdvanceOptions advance{};
};

struct EngineBackends {
  gateway::BackendHandle counselor;
  gateway::BackendHandle client;
  gateway::BackendHandle judge;
  gateway::BackendHandle extractor;
};

/// Rolled-out and scored candidates of the next session, awaiting selection.
struct PendingStep {
  int session_index = 0;
  std::uint64_t base_seed = 0;
  std::vector<SessionCandidate> candidates;
  std::optional<std::size_t> argmax;
  bool tie = false;
};

/// Step-wise driver of the lifelong loop: prepare_step (rollout + scoring)
/// then commit_step (selection + advance). Selection and advancing are a
/// serial barrier per session; candidates within a step run concurrently.
class Engine {
 public:
  using CommitHook = std::function<void(const LifelongRun&, const PendingStep&, const SessionRecord&)>;

  Engine(EngineConfig config, EngineBackends backends, LifelongRun run);

  bool done() const { return run_.completed() >= config_.sessions; }
  int next_session() const { return run_.completed() + 1; }
  std::uint64_t session_seed(int session_index) const;

  /// Rolls out and scores session next_session(). Returns the existing pending
  /// step when called twice. PreconditionError when the run is complete;
  /// RunAbort when every candidate fails.
  const PendingStep& prepare_step();
  const std::optional<PendingStep>& pending() const { return pending_; }

  /// Selects the winner (argmax, or `manual` as an operator choice) and
  /// advances memory and tree from it. RunAbort on component failure; the run
  /// is left at the last committed session.
  const SessionRecord& commit_step(std::optional<std::size_t> manual = std::nullopt);

  const LifelongRun& run() const { return run_; }
  const EngineConfig& config() const { return config_; }
  void on_commit(CommitHook hook) { hook_ = std::move(hook); }

  /// prepare + commit until done.
  void run_to_end();

 private:
  EngineConfig config_;
  EngineBackends backends_;
  LifelongRun run_;
  std::optional<PendingStep> pending_;
  CommitHook hook_;
};

/// Executes T iterations of rollout -> score -> select -> advance.
LifelongRun run_lifelong(const EngineConfig& config, const EngineBackends& backends, LifelongRun initial,
                         Engine::CommitHook hook = {});

}  // namespace evocounsel::rollout
