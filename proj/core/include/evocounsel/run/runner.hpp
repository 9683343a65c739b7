#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "evocounsel/rollout/lifelong.hpp"
#include "evocounsel/run/backends.hpp"
#include "evocounsel/run/config.hpp"
#include "evocounsel/run/store.hpp"

namespace evocounsel::run {

/// A run bound to its directory: every committed session is persisted and
/// checkpointed before the next one starts.
class Runner {
 public:
  /// Fresh run into `dir` (config.output_dir when empty). Refuses a directory
  /// that already holds a checkpoint.
  static std::unique_ptr<Runner> create(const RunConfig& config, std::filesystem::path dir = {});
  /// Continues a run from its checkpoint. The stored config must still hash to
  /// the checkpoint's digest. `scripted_dir` re-points scripted backends
  /// without changing the digest check.
  static std::unique_ptr<Runner> resume(const std::filesystem::path& dir,
                                        const std::optional<std::filesystem::path>& scripted_dir = {});

  rollout::Engine& engine() { return *engine_; }
  const RunStore& store() const { return store_; }
  const RunConfig& config() const { return config_; }
  const client::Rubric& rubric() const { return rubric_; }

  /// Rolls out the next session and writes its candidates (pending state).
  const rollout::PendingStep& prepare();
  const rollout::SessionRecord& commit(std::optional<std::size_t> manual = std::nullopt);

  /// Runs the remaining sessions, then writes datasets and the report. On a
  /// RunAbort the run log records the reason and the exception is rethrown;
  /// checkpoint.json still describes the last committed session.
  void run_to_end();
  void finish();

 private:
  Runner(RunConfig config, RunStore store);
  void start(rollout::LifelongRun run);
  void on_abort(const std::exception& e);

  RunConfig config_;
  RunStore store_;
  RunBackends backends_;
  client::Rubric rubric_;
  std::unique_ptr<rollout::Engine> engine_;
};

}  // namespace evocounsel::run
