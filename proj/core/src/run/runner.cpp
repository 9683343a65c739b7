#include "evocounsel/run/runner.hpp"

#include <fstream>

#include "evocounsel/common/digest.hpp"
#include "evocounsel/common/errors.hpp"

namespace evocounsel::run {

namespace fs = std::filesystem;

Runner::Runner(RunConfig config, RunStore store) : config_(std::move(config)), store_(std::move(store)) {}

std::unique_ptr<Runner> Runner::create(const RunConfig& config, fs::path dir) {
  if (auto issues = config.validate(); !issues.empty()) throw ValidationError(std::move(issues));
  if (dir.empty()) dir = config.output_dir;
  if (dir.empty()) dir = fs::path("runs") / config.effective_run_id();
  RunStore store(dir);
  if (store.has_checkpoint())
    throw PreconditionError("run directory " + dir.string() + " already holds a run; use resume");

  std::unique_ptr<Runner> r(new Runner(config, store));
  r->config_.output_dir = dir.string();
  select_card(r->config_);  // fail early on a bad card choice
  r->rubric_ = load_rubric(r->config_);
  auto tree = load_seed_tree(r->config_);
  auto run = rollout::start_run(r->config_.effective_run_id(), r->config_.digest(), r->config_.flags, {}, std::move(tree));

  fs::create_directories(dir);
  // a previous aborted attempt without a checkpoint may have left a log behind
  fs::remove(dir / "gateway_log.jsonl");
  fs::remove(dir / "skill_updates.jsonl");
  store.write_config(r->config_);
  store.write_memory(run.memory());
  store.write_tree(run.tree());
  store.write_run_log(run);
  store.write_checkpoint({run.run_id, run.config_digest, 0, run.memory().digest(), run.tree().version, r->config_.seed});
  std::ofstream(dir / "gateway_log.jsonl", std::ios::app);
  std::ofstream(dir / "skill_updates.jsonl", std::ios::app);

  r->backends_ = make_backends(r->config_);
  r->start(std::move(run));
  return r;
}

std::unique_ptr<Runner> Runner::resume(const fs::path& dir, const std::optional<fs::path>& scripted_dir) {
  RunStore store(dir);
  if (!store.has_checkpoint()) throw PreconditionError("no checkpoint in " + dir.string());
  RunConfig config = store.read_config();
  const auto cp = store.read_checkpoint();
  if (config.digest() != cp.config_digest)
    throw ValidationError({"config.json: digest differs from the checkpoint's config_digest"});
  if (auto issues = config.validate(); !issues.empty()) throw ValidationError(std::move(issues));

  std::unique_ptr<Runner> r(new Runner(config, store));
  if (scripted_dir) apply_scripted_dir(r->config_, *scripted_dir);
  r->rubric_ = load_rubric(r->config_);
  r->backends_ = make_backends(r->config_);
  r->start(store.load_run());
  return r;
}

void Runner::start(rollout::LifelongRun run) {
  const auto card = select_card(config_);
  engine_ = std::make_unique<rollout::Engine>(engine_config(config_, card, rubric_, backends_.metric.get()),
                                              backends_.roles, std::move(run));
  engine_->on_commit([this](const rollout::LifelongRun& run, const rollout::PendingStep& step,
                            const rollout::SessionRecord& record) {
    store_.append_gateway_log(backends_.log->drain());
    store_.write_commit(run, step, record, engine_->session_seed(run.completed() + 1));
  });
}

void Runner::on_abort(const std::exception& e) {
  // calls of the unfinished step are kept apart so a resumed run's log matches
  // an uninterrupted one
  const auto stray = backends_.log->drain();
  if (!stray.empty()) {
    std::ofstream out(store_.dir() / "gateway_log.aborted.jsonl", std::ios::app | std::ios::binary);
    for (const auto& entry : stray) out << canonical_json(entry.to_json()) << '\n';
  }
  store_.write_run_log(engine_->run(), std::string(e.what()));
}

const rollout::PendingStep& Runner::prepare() {
  try {
    const auto& step = engine_->prepare_step();
    store_.write_candidates(step.session_index, step.candidates);
    return step;
  } catch (const RunAbort& e) {
    on_abort(e);
    throw;
  }
}

const rollout::SessionRecord& Runner::commit(std::optional<std::size_t> manual) {
  try {
    return engine_->commit_step(manual);
  } catch (const RunAbort& e) {
    on_abort(e);
    throw;
  }
}

void Runner::run_to_end() {
  while (!engine_->done()) {
    prepare();
    commit();
  }
  finish();
}

void Runner::finish() {
  store_.write_run_log(engine_->run());
  store_.write_outputs(engine_->run(), rubric_, config_.history_masking);
}

}  // namespace evocounsel::run
