#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/gateway/gateway_log.hpp"
#include "evocounsel/rollout/candidate.hpp"
#include "evocounsel/rollout/lifelong.hpp"
#include "evocounsel/run/config.hpp"

namespace evocounsel::run {

struct Checkpoint {
  std::string run_id;
  std::string config_digest;
  int completed_session = 0;
  std::string memory_snapshot_id;
  int tree_version = 0;
  std::uint64_t next_seed = 0;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;

  nlohmann::json to_json() const;
  static Checkpoint from_json(const nlohmann::json& j);
};

/// On-disk layout of a run:
///
///   config.json  gateway_log.jsonl  run_log.json  checkpoint.json
///   skill_updates.jsonl  report.json  trajectory.csv  trajectory.json
///   sessions/t{index}/candidate{k}.json
///   memory/{digest}.json  tree/{version}.json
///   datasets/rft.jsonl  datasets/sft.jsonl
class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path memory_path(const std::string& digest) const;
  std::filesystem::path tree_path(int version) const;
  std::filesystem::path candidate_path(int session_index, int k) const;

  bool has_checkpoint() const;
  void write_config(const RunConfig& config) const;
  RunConfig read_config() const;

  void write_memory(const memory::MemoryState& m) const;
  void write_tree(const skills::SkillTree& t) const;
  void write_candidates(int session_index, const std::vector<rollout::SessionCandidate>& candidates) const;
  std::vector<rollout::SessionCandidate> read_candidates(int session_index) const;

  /// Everything a committed session produces, then the run log and checkpoint.
  void write_commit(const rollout::LifelongRun& run, const rollout::PendingStep& step,
                    const rollout::SessionRecord& record, std::uint64_t next_seed) const;
  void append_gateway_log(const std::vector<gateway::GatewayLogEntry>& entries) const;
  void write_run_log(const rollout::LifelongRun& run, const std::optional<std::string>& abort_reason = {}) const;
  void write_checkpoint(const Checkpoint& cp) const;
  Checkpoint read_checkpoint() const;

  /// Datasets, report and trajectory files.
  void write_outputs(const rollout::LifelongRun& run, const client::Rubric& rubric, bool history_masking) const;

  /// Rebuilds the run as of the checkpoint from the files on disk.
  rollout::LifelongRun load_run() const;

 private:
  std::filesystem::path dir_;
};

}  // namespace evocounsel::run
