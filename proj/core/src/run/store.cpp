#include "evocounsel/run/store.hpp"

#include <fstream>

#include "evocounsel/common/digest.hpp"
#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/files.hpp"
#include "evocounsel/memory/sft.hpp"
#include "evocounsel/rollout/rft.hpp"
#include "evocounsel/run/report.hpp"

namespace evocounsel::run {

namespace fs = std::filesystem;
using nlohmann::json;

json Checkpoint::to_json() const {
  return {{"run_id", run_id},
          {"config_digest", config_digest},
          {"completed_session", completed_session},
          {"memory_snapshot_id", memory_snapshot_id},
          {"tree_version", tree_version},
          {"next_seed", next_seed}};
}

Checkpoint Checkpoint::from_json(const json& j) {
  try {
    return {j.at("run_id").get<std::string>(),     j.at("config_digest").get<std::string>(),
            j.at("completed_session").get<int>(),  j.at("memory_snapshot_id").get<std::string>(),
            j.at("tree_version").get<int>(),       j.at("next_seed").get<std::uint64_t>()};
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

fs::path RunStore::memory_path(const std::string& digest) const { return dir_ / "memory" / (digest + ".json"); }
fs::path RunStore::tree_path(int version) const { return dir_ / "tree" / (std::to_string(version) + ".json"); }
fs::path RunStore::candidate_path(int t, int k) const {
  return dir_ / "sessions" / ("t" + std::to_string(t)) / ("candidate" + std::to_string(k) + ".json");
}

bool RunStore::has_checkpoint() const { return fs::exists(dir_ / "checkpoint.json"); }

void RunStore::write_config(const RunConfig& config) const { files::write_json(dir_ / "config.json", config.to_json()); }

RunConfig RunStore::read_config() const {
  RunConfig c = RunConfig::from_json(files::read_json(dir_ / "config.json"));
  c.output_dir = dir_.string();
  return c;
}

void RunStore::write_memory(const memory::MemoryState& m) const { files::write_json(memory_path(m.digest()), m.to_json()); }

void RunStore::write_tree(const skills::SkillTree& t) const { files::write_text(tree_path(t.version), skills::serialize_tree(t)); }

void RunStore::write_candidates(int t, const std::vector<rollout::SessionCandidate>& candidates) const {
  for (const auto& c : candidates) files::write_json(candidate_path(t, c.candidate_index), c.to_json());
}

std::vector<rollout::SessionCandidate> RunStore::read_candidates(int t) const {
  std::vector<rollout::SessionCandidate> out;
  for (int k = 0;; ++k) {
    const auto p = candidate_path(t, k);
    if (!fs::exists(p)) break;
    out.push_back(rollout::SessionCandidate::from_json(files::read_json(p)));
  }
  return out;
}

void RunStore::append_gateway_log(const std::vector<gateway::GatewayLogEntry>& entries) const {
  fs::create_directories(dir_);
  std::ofstream out(dir_ / "gateway_log.jsonl", std::ios::app | std::ios::binary);
  for (const auto& e : entries) out << canonical_json(e.to_json()) << '\n';
  if (!out) throw Error("cannot append to " + (dir_ / "gateway_log.jsonl").string());
}

void RunStore::write_run_log(const rollout::LifelongRun& run, const std::optional<std::string>& abort_reason) const {
  json records = json::array();
  for (const auto& r : run.records) records.push_back(r.to_json());
  json j = {{"run_id", run.run_id},
            {"config_digest", run.config_digest},
            {"flags", run.flags.to_json()},
            {"ablation", run.flags.tag()},
            {"initial_memory_id", run.memories.front().digest()},
            {"initial_tree_version", run.trees.front().version},
            {"sessions", std::move(records)},
            {"aborted", abort_reason ? json(*abort_reason) : json()}};
  files::write_json(dir_ / "run_log.json", j);
}

void RunStore::write_checkpoint(const Checkpoint& cp) const { files::write_json(dir_ / "checkpoint.json", cp.to_json()); }

Checkpoint RunStore::read_checkpoint() const { return Checkpoint::from_json(files::read_json(dir_ / "checkpoint.json")); }

void RunStore::write_commit(const rollout::LifelongRun& run, const rollout::PendingStep& step,
                            const rollout::SessionRecord& record, std::uint64_t next_seed) const {
  write_candidates(step.session_index, step.candidates);
  write_memory(run.memory());
  write_tree(run.tree());
  if (record.skill_update) {
    json line = record.skill_update->to_json();
    line["session_index"] = record.session_index;
    line["tree_version"] = record.tree_version_after;
    std::ofstream out(dir_ / "skill_updates.jsonl", std::ios::app | std::ios::binary);
    out << canonical_json(line) << '\n';
  }
  write_run_log(run);
  write_checkpoint({run.run_id, run.config_digest, run.completed(), run.memory().digest(), run.tree().version, next_seed});
}

void RunStore::write_outputs(const rollout::LifelongRun& run, const client::Rubric& rubric, bool history_masking) const {
  const auto rft = rollout::emit_rft_dataset(run, history_masking);
  files::write_text(dir_ / "datasets" / "rft.jsonl", rollout::serialize_rft(rft));
  const auto sources = run.sft_sources();
  const auto sft = memory::emit_sft_records(sources);
  files::write_text(dir_ / "datasets" / "sft.jsonl", memory::serialize_sft(sft));
  files::write_json(dir_ / "report.json", build_report(run, rubric));
  const auto traj = trajectory_from_run(run, rubric);
  files::write_text(dir_ / "trajectory.csv", traj.to_csv());
  files::write_json(dir_ / "trajectory.json", traj.to_json());
}

rollout::LifelongRun RunStore::load_run() const {
  const auto cp = read_checkpoint();
  const json log = files::read_json(dir_ / "run_log.json");
  rollout::LifelongRun run;
  run.run_id = log.at("run_id").get<std::string>();
  run.config_digest = log.at("config_digest").get<std::string>();
  run.flags = rollout::AblationFlags::from_json(log.at("flags"));
  if (run.run_id != cp.run_id || run.config_digest != cp.config_digest)
    throw ValidationError({"checkpoint: does not match run_log.json"});

  run.memories.push_back(memory::MemoryState::from_json(files::read_json(memory_path(log.at("initial_memory_id").get<std::string>()))));
  run.trees.push_back(skills::load_tree(tree_path(log.at("initial_tree_version").get<int>())));
  const auto& sessions = log.at("sessions");
  if (static_cast<int>(sessions.size()) < cp.completed_session)
    throw ValidationError({"checkpoint: run_log.json has fewer sessions than completed_session"});
  for (int i = 0; i < cp.completed_session; ++i) {
    auto rec = rollout::SessionRecord::from_json(sessions[static_cast<std::size_t>(i)]);
    run.memories.push_back(memory::MemoryState::from_json(files::read_json(memory_path(rec.memory_after_id))));
    run.trees.push_back(skills::load_tree(tree_path(rec.tree_version_after)));
    run.winners.push_back(rollout::SessionCandidate::from_json(
        files::read_json(candidate_path(rec.session_index, static_cast<int>(rec.winner_index)))));
    run.records.push_back(std::move(rec));
  }
  if (run.memory().digest() != cp.memory_snapshot_id || run.tree().version != cp.tree_version)
    throw ValidationError({"checkpoint: memory or tree state does not match the stored artifacts"});
  return run;
}

}  // namespace evocounsel::run
