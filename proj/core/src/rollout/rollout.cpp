#include "evocounsel/rollout/rollout.hpp"

#include <atomic>
#include <cstdio>
#include <thread>

#include "evocounsel/client/simulator.hpp"
#include "evocounsel/common/errors.hpp"
#include "evocounsel/skills/retrieval.hpp"

namespace evocounsel::rollout {

gateway::CallContext candidate_call(int session_index, int candidate_index, std::uint64_t seed) {
  char scope[32];
  std::snprintf(scope, sizeof scope, "t%03d/c%02d", session_index, candidate_index);
  gateway::CallContext call;
  call.seed = seed;
  call.labels = {{"scope", scope},
                 {"session", std::to_string(session_index)},
                 {"candidate", std::to_string(candidate_index)}};
  return call;
}

void parallel_for(int count, int parallelism, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(parallelism, count));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) fn(i);
    });
  }
}

SessionCandidate play_candidate(const RolloutBackends& backends, const memory::MemoryState& memory,
                                const skills::SkillTree& tree, const client::ClientProfileCard& card,
                                int session_index, int candidate_index, const RolloutOptions& options) {
  SessionCandidate cand;
  cand.candidate_index = candidate_index;
  cand.id = candidate_id(session_index, candidate_index);
  cand.seed = options.base_seed + static_cast<std::uint64_t>(candidate_index);
  const auto call = candidate_call(session_index, candidate_index, cand.seed);

  auto& tr = cand.transcript;
  tr.session_index = session_index;
  tr.memory_snapshot_id = memory.digest();
  tr.plan = options.fixed_plan ? memory::generic_plan()
                               : memory::reason_plan(backends.counselor, memory, session_index, options.plan, call);

  const std::optional<std::string> root = client::root_id_for(card.therapy_school);
  for (int turn = 1; turn <= options.turn_limit; ++turn) {
    const auto turn_call = call.with("turn", std::to_string(turn));
    auto client_turn = client::simulate_client_turn(backends.client, card, tr.turns, turn_call, options.client);
    // The turn limit also ends the session; the flag records who ended it.
    const bool ending = client_turn.end_signal;
    const std::span<const memory::Turn> history(tr.turns);

    skills::AtomicSkill skill;
    if (options.fixed_skill) {
      skill = *options.fixed_skill;
    } else {
      skills::DialogueState state{client_turn.text, memory, tr.plan, root};
      skill = skills::retrieve_skill(backends.counselor, tree, state, turn_call, options.retrieval);
    }
    auto ctx = memory::assemble_context(client_turn.text, memory, tr.plan, skill, history);
    auto reply = memory::generate_turn(backends.counselor, ctx, skill, turn_call, options.generation);

    tr.turns.emplace_back(std::move(client_turn));
    cand.skill_refs.push_back(reply.skill_ref);
    tr.turns.emplace_back(std::move(reply));
    if (ending) break;
  }
  return cand;
}

std::vector<SessionCandidate> rollout_session(const RolloutBackends& backends, const memory::MemoryState& memory,
                                              const skills::SkillTree& tree, const client::ClientProfileCard& card,
                                              int session_index, const RolloutOptions& options) {
  if (options.n < 1) throw PreconditionError("rollout_session: n must be >= 1");
  if (options.turn_limit < 1) throw PreconditionError("rollout_session: turn_limit must be >= 1");

  std::vector<SessionCandidate> out(static_cast<std::size_t>(options.n));
  parallel_for(options.n, options.parallelism, [&](int k) {
    auto& slot = out[static_cast<std::size_t>(k)];
    try {
      slot = play_candidate(backends, memory, tree, card, session_index, k, options);
    } catch (const std::exception& e) {
      slot.candidate_index = k;
      slot.id = candidate_id(session_index, k);
      slot.seed = options.base_seed + static_cast<std::uint64_t>(k);
      slot.transcript.session_index = session_index;
      slot.transcript.memory_snapshot_id = memory.digest();
      slot.failed = true;
      slot.error = e.what();
    }
  });
  bool any = false;
  for (const auto& c : out) any = any || !c.failed;
  if (!any) throw Error("rollout_session: all " + std::to_string(options.n) + " candidates of session " +
                        std::to_string(session_index) + " failed: " + out.front().error);
  return out;
}

}  // namespace evocounsel::rollout
