#include <gtest/gtest.h>

#include <httplib.h>

#include "evocounsel/common/files.hpp"
#include "evocounsel/run/service.hpp"
#include "temp_dir.hpp"

using namespace evocounsel;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

run::RunConfig live_config() {
  auto c = evotest::demo_config();
  c.counselor.script = (evotest::fixtures_dir() / "live_counselor.json").string();
  return c;
}

struct Fixture {
  evotest::TempDir dir;
  std::unique_ptr<run::Service> svc;
  std::unique_ptr<httplib::Client> http;

  explicit Fixture(bool live = true, bool with_run = false) {
    run::ServiceOptions o;
    o.runs_root = dir / "runs";
    fs::create_directories(o.runs_root);
    if (live) o.live = live_config();
    if (with_run) evotest::run_to_completion(evotest::demo_config(), o.runs_root / "demo");
    svc = std::make_unique<run::Service>(o);
    const int port = svc->start();
    http = std::make_unique<httplib::Client>("127.0.0.1", port);
  }

  std::pair<int, json> post(const std::string& path, const json& body) {
    auto r = http->Post(path, body.dump(), "application/json");
    if (!r) return {0, json()};
    return {r->status, r->body.empty() ? json() : json::parse(r->body)};
  }
  std::pair<int, std::string> get(const std::string& path) {
    auto r = http->Get(path);
    if (!r) return {0, ""};
    return {r->status, r->body};
  }
};

}  // namespace

TEST(Service, BindsLoopbackByDefault) {
  run::ServiceOptions o;
  EXPECT_EQ(o.host, "127.0.0.1");
}

TEST(Service, LiveTurnReturnsSkill) {
  Fixture f;
  auto [st, s] = f.post("/sessions", json::object());
  ASSERT_EQ(st, 201) << s.dump();
  const std::string id = s["session_id"];
  auto [st2, turn] = f.post("/sessions/" + id + "/turns", {{"text", "I can't sleep"}});
  ASSERT_EQ(st2, 200) << turn.dump();
  EXPECT_FALSE(turn["response"].get<std::string>().empty());
  EXPECT_EQ(turn["skill"]["id"], "cbt.core_intervention.cognitive_restructuring.socratic_questioning");
  EXPECT_EQ(turn["skill"]["name"], "Socratic Questioning");
  EXPECT_EQ(turn["turn_id"], 1);
  EXPECT_TRUE(turn.contains("reasoning"));
  EXPECT_EQ(turn["plan"]["stage"], "Core Intervention");

  auto [st3, body] = f.get("/sessions/" + id);
  ASSERT_EQ(st3, 200);
  auto view = json::parse(body);
  EXPECT_EQ(view["turns"].size(), 2u);

  EXPECT_EQ(f.post("/sessions/" + id + "/turns", {{"text", "bye"}, {"end_signal", true}}).first, 200);
  EXPECT_EQ(f.post("/sessions/" + id + "/turns", {{"text", "again"}}).first, 409);
  EXPECT_EQ(f.post("/sessions/nope/turns", {{"text", "x"}}).first, 404);
  EXPECT_EQ(f.post("/sessions/" + id + "/turns", {{"text", ""}}).first, 400);
}

TEST(Service, NoLiveConfigIs503) {
  Fixture f(false);
  EXPECT_EQ(f.post("/sessions", json::object()).first, 503);
}

TEST(Service, StoredRunEndpoints) {
  Fixture f(false, true);
  auto [st, body] = f.get("/runs/demo/tree/0");
  ASSERT_EQ(st, 200);
  EXPECT_EQ(body, evotest::slurp(skills::default_seed_tree_path()));
  EXPECT_EQ(f.get("/runs/demo/tree/99").first, 404);
  EXPECT_EQ(f.get("/runs/nope/tree/0").first, 404);

  auto summary = json::parse(f.get("/runs/demo").second);
  const std::string mem = summary["memory_snapshot_id"];
  auto [ms, mbody] = f.get("/runs/demo/memory/" + mem);
  ASSERT_EQ(ms, 200);
  EXPECT_EQ(mbody, evotest::slurp(f.dir / ("runs/demo/memory/" + mem + ".json")));
  EXPECT_EQ(f.get("/runs/demo/memory/deadbeef").first, 404);

  auto cands = json::parse(f.get("/runs/demo/candidates/1").second);
  EXPECT_EQ(cands["status"], "committed");
  EXPECT_EQ(cands["candidates"].size(), 4u);
  EXPECT_EQ(cands["winner_index"], 2);
  EXPECT_EQ(cands["argmax_index"], 2);
  EXPECT_EQ(f.get("/runs/demo/candidates/9").first, 404);

  // step 1 was advanced long ago
  EXPECT_EQ(f.post("/runs/demo/select/1", {{"candidate_index", 0}}).first, 409);

  auto list = json::parse(f.get("/runs").second);
  EXPECT_EQ(list["runs"].size(), 1u);
}

TEST(Service, OperatorSelectionRoundTrip) {
  Fixture f(false);
  auto cfg = evotest::demo_config();
  cfg.sessions = 2;
  cfg.run_id = "op";
  auto [st, created] = f.post("/runs", {{"config", cfg.to_json()}});
  ASSERT_EQ(st, 201) << created.dump();

  auto board = json::parse(f.get("/runs/op/candidates/1").second);
  ASSERT_EQ(board["status"], "pending");
  EXPECT_EQ(board["argmax_index"], 2);
  // trophy index equals the argmax of the listed aggregates
  std::size_t best = 0;
  for (std::size_t k = 1; k < board["candidates"].size(); ++k) {
    if (board["candidates"][k]["aggregate"].get<double>() > board["candidates"][best]["aggregate"].get<double>()) best = k;
  }
  EXPECT_EQ(board["argmax_index"], best);

  EXPECT_EQ(f.post("/runs/op/select/2", {{"candidate_index", 0}}).first, 404);  // not pending yet
  auto [ss, sel] = f.post("/runs/op/select/1", {{"candidate_index", 0}});
  ASSERT_EQ(ss, 200) << sel.dump();
  EXPECT_EQ(sel["selector"], "operator");
  EXPECT_EQ(sel["winner_index"], 0);
  EXPECT_EQ(f.post("/runs/op/select/1", {{"candidate_index", 1}}).first, 409);

  auto after = json::parse(f.get("/runs/op/candidates/1").second);
  EXPECT_EQ(after["status"], "committed");
  EXPECT_EQ(after["selector"], "operator");
  EXPECT_EQ(after["winner_index"], 0);
  auto log = files::read_json(f.dir / "runs/op/run_log.json");
  EXPECT_EQ(log["sessions"][0]["selector"], "operator");

  // finish the run with the second step
  EXPECT_EQ(f.post("/runs/op/select/2", {{"candidate_index", 1}}).first, 200);
  EXPECT_TRUE(fs::exists(f.dir / "runs/op/report.json"));
  // winner isolation still holds for the operator's pick: the argmax candidate's marker is absent
  const std::string rft = evotest::slurp(f.dir / "runs/op/datasets/rft.jsonl");
  EXPECT_NE(rft.find("MKs1c0"), std::string::npos);
  EXPECT_EQ(rft.find("MKs1c2"), std::string::npos);
}

TEST(Service, BadRequests) {
  Fixture f(false);
  EXPECT_EQ(f.post("/runs", {{"nothing", 1}}).first, 400);
  auto cfg = evotest::demo_config().to_json();
  cfg["n_rollouts"] = 0;
  EXPECT_EQ(f.post("/runs", {{"config", cfg}}).first, 400);
  auto r = f.http->Post("/sessions", "{not json", "application/json");
  ASSERT_TRUE(r);
  EXPECT_TRUE(r->status == 400 || r->status == 503);
}
