#include <gtest/gtest.h>

#include <cstdlib>

#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/files.hpp"
#include "evocounsel/rollout/rft.hpp"
#include "evocounsel/run/backends.hpp"
#include "evocounsel/run/config.hpp"
#include "evocounsel/run/report.hpp"
#include "evocounsel/run/runner.hpp"
#include "evocounsel/run/store.hpp"
#include "temp_dir.hpp"

using namespace evocounsel;
using namespace evocounsel::run;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// demo config with a judge that answers 7 to everything
RunConfig constant_judge_config(const fs::path& dir) {
  files::write_json(dir / "judge7.json", {{"mode", "by_tag"}, {"entries", {{{"tag", "judge"}, {"response", "7"}}}}});
  auto c = evotest::demo_config();
  c.judge.script = (dir / "judge7.json").string();
  c.run_id = "const7";
  return c;
}

}  // namespace

TEST(Config, DemoLoadsAndRoundTrips) {
  auto c = evotest::demo_config();
  EXPECT_TRUE(c.validate().empty());
  EXPECT_EQ(c.n_rollouts, 4);
  EXPECT_EQ(c.sessions, 3);
  EXPECT_TRUE(fs::path(c.counselor.script).is_absolute());
  EXPECT_EQ(RunConfig::from_json(c.to_json()), c);
  EXPECT_EQ(c.effective_run_id(), "demo");
}

TEST(Config, Defaults) {
  RunConfig c;
  EXPECT_EQ(c.n_rollouts, 8);
  EXPECT_EQ(c.turn_limit, 20);
  EXPECT_DOUBLE_EQ(c.similarity_low, 0.30);
  EXPECT_DOUBLE_EQ(c.similarity_high, 0.90);
  EXPECT_EQ(c.counselor.api_key_env, "OPENAI_API_KEY");
}

TEST(Config, DigestIgnoresOutputDir) {
  auto a = evotest::demo_config();
  auto b = a;
  b.output_dir = "/somewhere/else";
  EXPECT_EQ(a.digest(), b.digest());
  b.seed += 1;
  EXPECT_NE(a.digest(), b.digest());
  a.run_id.clear();
  EXPECT_EQ(a.effective_run_id(), "run-" + a.digest().substr(0, 12));
}

TEST(Config, FieldPathErrors) {
  auto j = evotest::demo_config().to_json();
  j["n_rollouts"] = 0;
  j["similarity"]["low"] = 0.95;
  auto c = RunConfig::from_json(j);
  auto issues = c.validate();
  auto has = [&](const std::string& s) {
    for (const auto& i : issues)
      if (i.rfind(s, 0) == 0) return true;
    return false;
  };
  EXPECT_TRUE(has("n_rollouts:"));
  EXPECT_TRUE(has("similarity:"));

  auto k = evotest::demo_config().to_json();
  k["backends"]["judge"]["tempurature"] = 1;
  try {
    RunConfig::from_json(k);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("backends.judge.tempurature"), std::string::npos);
  }
  auto w = evotest::demo_config().to_json();
  w["sessions"] = "three";
  EXPECT_THROW(RunConfig::from_json(w), ValidationError);
}

TEST(Config, KeyOnlyFromEnvironment) {
  RunConfig c = evotest::demo_config();
  c.counselor.kind = "http";
  c.counselor.endpoint = "http://127.0.0.1:9/v1";
  c.counselor.model = "m";
  c.counselor.api_key_env = "EVOTEST_UNSET_KEY_VAR";
  ::unsetenv("EVOTEST_UNSET_KEY_VAR");
  EXPECT_THROW(make_backend(c.counselor, "counselor"), ValidationError);
  ::setenv("EVOTEST_UNSET_KEY_VAR", "sk-secret-value", 1);
  EXPECT_NO_THROW(make_backend(c.counselor, "counselor"));
  EXPECT_EQ(c.to_json().dump().find("sk-secret-value"), std::string::npos);
  ::unsetenv("EVOTEST_UNSET_KEY_VAR");
}

TEST(Runner, RunDirectoryLayout) {
  evotest::TempDir dir;
  evotest::run_to_completion(evotest::demo_config(), dir.path());
  for (const char* f : {"config.json", "gateway_log.jsonl", "run_log.json", "checkpoint.json", "skill_updates.jsonl",
                        "report.json", "trajectory.csv", "trajectory.json", "datasets/rft.jsonl", "datasets/sft.jsonl",
                        "tree/0.json", "tree/3.json", "sessions/t1/candidate0.json", "sessions/t3/candidate3.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  RunStore store(dir.path());
  auto cp = store.read_checkpoint();
  EXPECT_EQ(cp.completed_session, 3);
  EXPECT_EQ(cp.tree_version, 3);
  EXPECT_TRUE(fs::exists(store.memory_path(cp.memory_snapshot_id)));
  // tree/0.json is the seed tree, byte for byte
  EXPECT_EQ(evotest::slurp(dir / "tree/0.json"), evotest::slurp(skills::default_seed_tree_path()));
  // datasets parse back
  auto rft = rollout::parse_rft(evotest::slurp(dir / "datasets/rft.jsonl"));
  EXPECT_EQ(rft.size(), 3u);
  auto loaded = store.load_run();
  EXPECT_EQ(loaded.completed(), 3);
  EXPECT_EQ(rollout::serialize_rft(rollout::emit_rft_dataset(loaded)), evotest::slurp(dir / "datasets/rft.jsonl"));
}

TEST(Runner, RefusesExistingCheckpoint) {
  evotest::TempDir dir;
  auto c = evotest::demo_config();
  c.sessions = 1;
  evotest::run_to_completion(c, dir.path());
  EXPECT_THROW(Runner::create(c, dir.path()), Error);
}

TEST(Runner, ResumeMatchesUninterruptedRun) {
  evotest::TempDir full, part;
  evotest::run_to_completion(evotest::demo_config(), full.path());
  {
    auto r = Runner::create(evotest::demo_config(), part.path());
    r->prepare();
    r->commit();
  }
  EXPECT_EQ(RunStore(part.path()).read_checkpoint().completed_session, 1);
  EXPECT_FALSE(fs::exists(part / "sessions/t2"));
  auto r = Runner::resume(part.path());
  EXPECT_EQ(r->engine().next_session(), 2);
  r->run_to_end();
  EXPECT_EQ(evotest::snapshot_dir(full.path()), evotest::snapshot_dir(part.path()));
}

TEST(Runner, ResumeRejectsEditedConfig) {
  evotest::TempDir dir;
  auto c = evotest::demo_config();
  auto r = Runner::create(c, dir.path());
  r->prepare();
  r->commit();
  auto j = files::read_json(dir / "config.json");
  j["seed"] = 1;
  files::write_json(dir / "config.json", j);
  EXPECT_THROW(Runner::resume(dir.path()), Error);
}

TEST(Runner, AbortKeepsLastCheckpoint) {
  evotest::TempDir dir;
  auto c = evotest::demo_config();
  files::write_json(dir / "judge_s1.json",
                    {{"mode", "by_tag"}, {"entries", {{{"tag", "judge"}, {"labels", {{"session", "1"}}}, {"response", "5"}}}}});
  c.judge.script = (dir / "judge_s1.json").string();
  auto r = Runner::create(c, dir / "run");
  EXPECT_THROW(r->run_to_end(), RunAbort);
  RunStore store(dir / "run");
  EXPECT_EQ(store.read_checkpoint().completed_session, 1);
  auto log = files::read_json(dir / "run/run_log.json");
  EXPECT_FALSE(log["aborted"].is_null());
  EXPECT_EQ(log["sessions"].size(), 1u);
}

TEST(Report, ConstantJudgeMeans) {
  evotest::TempDir dir;
  evotest::run_to_completion(constant_judge_config(dir.path()), dir / "run");
  auto rep = files::read_json(dir / "run/report.json");
  ASSERT_EQ(rep["dimension_means"].size(), 4u);
  for (const auto& [k, v] : rep["dimension_means"].items()) EXPECT_DOUBLE_EQ(v.get<double>(), 7.0) << k;
  EXPECT_DOUBLE_EQ(rep["aggregate_mean"].get<double>(), 7.0);
  EXPECT_EQ(rep["sessions_completed"], 3);
}

TEST(Report, MeansMatchRecomputation) {
  evotest::TempDir dir;
  evotest::run_to_completion(evotest::demo_config(), dir.path());
  auto log = files::read_json(dir / "run_log.json");
  auto rep = files::read_json(dir / "report.json");
  // oracle: read the winner candidate files and average by hand
  std::map<std::string, double> sum;
  double agg = 0;
  for (const auto& s : log["sessions"]) {
    const auto w = s["winner_index"].get<int>();
    auto c = files::read_json(dir / ("sessions/t" + std::to_string(s["session_index"].get<int>()) + "/candidate" +
                                     std::to_string(w) + ".json"));
    for (const auto& [k, v] : c["reward"]["dimension_scores"].items()) sum[k] += v.get<double>();
    agg += c["reward"]["aggregate"].get<double>();
  }
  for (const auto& [k, v] : sum) EXPECT_NEAR(rep["dimension_means"][k].get<double>(), v / 3.0, 1e-12) << k;
  EXPECT_NEAR(rep["aggregate_mean"].get<double>(), agg / 3.0, 1e-12);
}

TEST(Report, CompareFullAndNoSee) {
  evotest::TempDir dir;
  auto full = evotest::demo_config();
  auto nosee = evotest::demo_config();
  nosee.flags.no_see = true;
  nosee.run_id = "demo-no-see";
  evotest::run_to_completion(full, dir / "full");
  evotest::run_to_completion(nosee, dir / "nosee");
  auto cmp = compare_reports({files::read_json(dir / "full/report.json"), files::read_json(dir / "nosee/report.json")});
  ASSERT_TRUE(cmp["tags"].contains("full"));
  ASSERT_TRUE(cmp["tags"].contains("no_see"));
  EXPECT_TRUE(cmp["tags"]["full"].contains("dimension_means"));
  EXPECT_EQ(cmp["runs"]["no_see"]["tree_version_final"], 0);
  EXPECT_EQ(cmp["runs"]["full"]["tree_version_final"], 3);

  const int rc = evotest::run_cli("report \"" + (dir / "full").string() + "\" \"" + (dir / "nosee").string() +
                                      "\" --out \"" + (dir / "cmp.json").string() + "\"",
                                  dir / "cli.log");
  EXPECT_EQ(rc, 0) << evotest::slurp(dir / "cli.log");
  auto from_cli = files::read_json(dir / "cmp.json");
  EXPECT_TRUE(from_cli["tags"].contains("full") && from_cli["tags"].contains("no_see"));
}

TEST(Report, EmptyRunSkeleton) {
  evotest::TempDir dir;
  auto c = evotest::demo_config();
  c.sessions = 0;
  evotest::run_to_completion(c, dir.path());
  auto rep = files::read_json(dir / "report.json");
  for (const char* k : {"run_id", "config_digest", "ablation", "flags", "sessions_completed", "dimension_means",
                        "aggregate_mean", "tree_version_initial", "tree_version_final", "sessions", "trajectory"})
    EXPECT_TRUE(rep.contains(k)) << k;
  EXPECT_EQ(rep["sessions_completed"], 0);
  EXPECT_TRUE(rep["sessions"].empty());
  EXPECT_TRUE(rep["aggregate_mean"].is_null());
  EXPECT_EQ(evotest::slurp(dir / "datasets/rft.jsonl"), std::string(rollout::kRftHeader) + "\n");
  EXPECT_EQ(evotest::slurp(dir / "trajectory.csv"), "metric,direction,session_index,value\n");
}

TEST(Cli, RunValidateAndErrors) {
  evotest::TempDir dir;
  const auto cfg = (evotest::demo_dir() / "config.json").string();
  EXPECT_EQ(evotest::run_cli("run --config \"" + cfg + "\" --scripted \"" + evotest::demo_dir().string() + "\" --out \"" +
                                 (dir / "run").string() + "\"",
                             dir / "a.log"),
            0)
      << evotest::slurp(dir / "a.log");
  EXPECT_TRUE(fs::exists(dir / "run/report.json"));

  auto bad = files::read_json(evotest::demo_dir() / "config.json");
  bad["n_rollouts"] = 0;
  files::write_json(dir / "bad.json", bad);
  EXPECT_EQ(evotest::run_cli("run --config \"" + (dir / "bad.json").string() + "\" --scripted \"" +
                                 evotest::demo_dir().string() + "\" --out \"" + (dir / "bad").string() + "\"",
                             dir / "b.log"),
            2);
  EXPECT_NE(evotest::slurp(dir / "b.log").find("n_rollouts"), std::string::npos);

  EXPECT_EQ(evotest::run_cli("validate-config \"" + cfg + "\"", dir / "c.log"), 0) << evotest::slurp(dir / "c.log");
  EXPECT_EQ(evotest::run_cli("validate-config \"" + (dir / "bad.json").string() + "\" --scripted \"" +
                                 evotest::demo_dir().string() + "\"",
                             dir / "d.log"),
            2);
  EXPECT_EQ(evotest::run_cli("no-such-command", dir / "e.log"), 2);
  EXPECT_EQ(evotest::run_cli("run --config \"" + (dir / "missing.json").string() + "\"", dir / "f.log"), 2);
  // the same directory again: refused
  EXPECT_NE(evotest::run_cli("run --config \"" + cfg + "\" --out \"" + (dir / "run").string() + "\"", dir / "g.log"), 0);
}

TEST(Cli, ResumeContinuesAfterCheckpoint) {
  evotest::TempDir dir;
  {
    auto r = Runner::create(evotest::demo_config(), dir / "run");
    r->prepare();
    r->commit();
  }
  const int rc = evotest::run_cli("run --resume \"" + (dir / "run/checkpoint.json").string() + "\"", dir / "r.log");
  EXPECT_EQ(rc, 0) << evotest::slurp(dir / "r.log");
  auto log = files::read_json(dir / "run/run_log.json");
  ASSERT_EQ(log["sessions"].size(), 3u);
  EXPECT_EQ(log["sessions"][1]["session_index"], 2);
  EXPECT_EQ(RunStore(dir / "run").read_checkpoint().completed_session, 3);
}

TEST(Cli, AbortExitsOne) {
  evotest::TempDir dir;
  auto j = files::read_json(evotest::demo_dir() / "config.json");
  files::write_json(dir / "judge_s1.json",
                    {{"mode", "by_tag"}, {"entries", {{{"tag", "judge"}, {"labels", {{"session", "1"}}}, {"response", "5"}}}}});
  for (const char* role : {"counselor", "client", "extractor"})
    j["backends"][role]["script"] = (evotest::demo_dir() / (std::string(role) + ".json")).string();
  j["backends"]["judge"]["script"] = (dir / "judge_s1.json").string();
  files::write_json(dir / "cfg.json", j);
  EXPECT_EQ(evotest::run_cli("run --config \"" + (dir / "cfg.json").string() + "\" --out \"" + (dir / "run").string() + "\"",
                             dir / "x.log"),
            1);
  EXPECT_TRUE(fs::exists(dir / "run/checkpoint.json"));
}

TEST(Cli, TreeDiff) {
  evotest::TempDir dir;
  evotest::run_to_completion(evotest::demo_config(), dir / "run");
  EXPECT_EQ(evotest::run_cli("tree-diff \"" + (dir / "run/tree/0.json").string() + "\" \"" +
                                 (dir / "run/tree/3.json").string() + "\" --json",
                             dir / "diff.json"),
            0);
  auto d = json::parse(evotest::slurp(dir / "diff.json"));
  EXPECT_EQ(d["appended"].size() + d["merged"].size() + d["merged_into_appended"].size(), 3u);
  EXPECT_EQ(d["from_version"], 0);
  EXPECT_EQ(d["to_version"], 3);
}
