#include "evocounsel/rollout/timeline.hpp"

#include <cstdio>

#include "evocounsel/common/errors.hpp"
#include "evocounsel/memory/context.hpp"

namespace evocounsel::rollout {

AdvanceResult advance_timeline(gateway::Backend& extractor, const memory::MemoryState& memory,
                               const skills::SkillTree& tree, const SessionCandidate& winner,
                               const std::optional<std::string>& root_id, const AdvanceOptions& options) {
  if (winner.failed) throw PreconditionError("advance_timeline: winner " + winner.id + " is a failed candidate");
  const int t = winner.transcript.session_index;
  char scope[32];
  std::snprintf(scope, sizeof scope, "t%03d/advance", t);
  gateway::CallContext call;
  call.seed = winner.seed;
  call.labels = {{"scope", scope}, {"session", std::to_string(t)}, {"candidate", std::to_string(winner.candidate_index)}};

  AdvanceResult out{memory, tree, std::nullopt, std::nullopt, std::nullopt, {}, {}};
  try {
    if (options.update_memory) {
      auto delta = memory::extract_attributes(extractor, winner.transcript, memory.profile, call, options.extraction);
      auto profile = memory::update_profile(memory.profile, delta, t, &out.warnings);
      auto summary = memory::summarize_session(extractor, winner.transcript, call, options.summary);
      memory::MemoryState next{std::move(profile), memory.summaries};
      out.memory = next.with_summary(summary, options.summary_cap);
      out.delta = std::move(delta);
      out.summary = std::move(summary);
    }
    if (options.evolve_skills) {
      auto draft = skills::extract_skill(extractor, winner.transcript, tree, winner.transcript.plan, winner.id,
                                         root_id, call, options.skill);
      const skills::TokenSetCosine cosine;
      const auto nearest = skills::nearest_skill(tree, draft, options.metric ? *options.metric : cosine);
      auto update = skills::manage_skill(extractor, draft, nearest, options.thresholds, call, options.skill);
      auto applied = skills::apply_update(tree, update, options.apply);
      out.tree = std::move(applied.tree);
      out.updated_node = std::move(applied.node_id);
      out.warnings.insert(out.warnings.end(), applied.warnings.begin(), applied.warnings.end());
      out.update = std::move(update);
    }
  } catch (const PreconditionError&) {
    throw;
  } catch (const std::exception& e) {
    throw Error("session " + winner.id + ": " + e.what());
  }
  return out;
}

}  // namespace evocounsel::rollout
