#include <gtest/gtest.h>

#include <thread>

#include "evocounsel/common/errors.hpp"
#include "evocounsel/gateway/gateway_log.hpp"
#include "evocounsel/gateway/http_backend.hpp"
#include "evocounsel/gateway/scripted.hpp"
#include "evocounsel/gateway/structured.hpp"
#include "generators.hpp"
#include "scripts.hpp"
#include "stub_server.hpp"

using namespace evocounsel;
using namespace evocounsel::gateway;
using nlohmann::json;

namespace {

const OutputSchema kPlanSchema{"session_plan", {{"stage", FieldKind::String, true}, {"objectives", FieldKind::List, true}}};

// Hand-rolled shape check, kept apart from check_conformance on purpose.
bool looks_like_plan(const json& v) {
  return v.is_object() && v.contains("stage") && v["stage"].is_string() && v.contains("objectives") &&
         v["objectives"].is_array();
}

}  // namespace

TEST(Scripted, ByTagLookup) {
  auto b = evotest::scripted(json::array({{{"tag", "plan_reasoning"}, {"response", "STAGE: Core Intervention"}}}));
  EXPECT_EQ(complete(*b, evotest::user_request("plan_reasoning", "x")).text, "STAGE: Core Intervention");
}

TEST(Scripted, SequentialExhaustion) {
  auto b = evotest::scripted(json::array({{{"response", "one"}}, {{"response", "two"}}}), "sequential");
  EXPECT_EQ(complete(*b, evotest::user_request("t", "x")).text, "one");
  EXPECT_EQ(complete(*b, evotest::user_request("t", "x")).text, "two");
  EXPECT_THROW(complete(*b, evotest::user_request("t", "x")), ScriptError);
}

TEST(Scripted, NoMatchIsScriptError) {
  auto b = evotest::scripted(json::array({{{"tag", "judge"}, {"response", "5"}}}));
  EXPECT_THROW(complete(*b, evotest::user_request("plan_reasoning", "x")), ScriptError);
}

TEST(Scripted, MatchersAndTemplating) {
  auto b = evotest::scripted(json::array({
      {{"tag", "t"}, {"contains", {"needle"}}, {"response", "contains-hit"}},
      {{"tag", "t"}, {"labels", {{"session", "2"}}}, {"response", "s={{session}} seed={{seed}} tag={{tag}}"}},
      {{"response", {{"k", 1}}}},
  }));
  EXPECT_EQ(complete(*b, evotest::user_request("t", "a needle here")).text, "contains-hit");
  auto r = evotest::user_request("t", "plain");
  r.labels["session"] = "2";
  r.seed = 77;
  EXPECT_EQ(complete(*b, r).text, "s=2 seed=77 tag=t");
  EXPECT_EQ(complete(*b, evotest::user_request("other", "plain")).text, R"({"k":1})");
  EXPECT_EQ(b->calls(), 3u);
}

TEST(Request, RejectsEmptyMessages) {
  ChatRequest r;
  r.tag = "t";
  auto b = evotest::scripted(json::array({{{"response", "x"}}}));
  EXPECT_THROW(complete(*b, r), PreconditionError);
}

TEST(Request, DigestIgnoresLabels) {
  auto a = evotest::user_request("t", "hello");
  auto b = a;
  b.labels["scope"] = "t001/c00";
  EXPECT_EQ(request_digest(a), request_digest(b));
  b.messages[0].text = "hello!";
  EXPECT_NE(request_digest(a), request_digest(b));
}

TEST(Structured, ParsesPlan) {
  const std::string literal = R"({"stage":"Core Intervention","objectives":["reinforce reframing"]})";
  ASSERT_TRUE(looks_like_plan(json::parse(literal)));
  auto b = evotest::scripted(json::array({{{"tag", "plan_reasoning"}, {"response", literal}}}));
  auto v = complete_structured(*b, evotest::user_request("plan_reasoning", "plan"), kPlanSchema);
  EXPECT_TRUE(looks_like_plan(v));
  EXPECT_EQ(v["objectives"].size(), 1u);
}

TEST(Structured, RepairsOnce) {
  auto b = evotest::scripted(
      json::array({{{"response", "not json"}}, {{"response", R"({"stage":"Core Intervention","objectives":["a"]})"}}}),
      "sequential");
  StructuredOptions o;
  o.max_repairs = 1;
  auto v = complete_structured(*b, evotest::user_request("plan_reasoning", "plan"), kPlanSchema, o);
  EXPECT_EQ(v["stage"], "Core Intervention");
  EXPECT_EQ(b->calls(), 2u);
}

TEST(Structured, RepairPromptCarriesValidatorError) {
  std::vector<ChatRequest> seen;
  FunctionBackend b([&](const ChatRequest& r) {
    seen.push_back(r);
    return ChatResponse{seen.size() == 1 ? "{\"stage\": 3}" : R"({"stage":"x","objectives":[]})", FinishReason::Stop, {}};
  });
  StructuredOptions o;
  o.max_repairs = 1;
  complete_structured(b, evotest::user_request("t", "go"), kPlanSchema, o);
  ASSERT_EQ(seen.size(), 2u);
  ASSERT_EQ(seen[1].messages.size(), 3u);
  EXPECT_EQ(seen[1].messages[1].role, Role::Assistant);
  EXPECT_EQ(seen[1].messages[2].role, Role::User);
  EXPECT_NE(seen[1].messages[2].text.find("stage"), std::string::npos);
}

TEST(Structured, MissingFieldNoRepairs) {
  auto b = evotest::scripted(json::array({{{"response", R"({"stage":"Core Intervention"})"}}}));
  StructuredOptions o;
  o.max_repairs = 0;
  try {
    complete_structured(*b, evotest::user_request("t", "x"), kPlanSchema, o);
    FAIL();
  } catch (const StructuredOutputError& e) {
    EXPECT_EQ(e.last_raw(), R"({"stage":"Core Intervention"})");
  }
}

TEST(Structured, ExtractsFromFenceAndProse) {
  EXPECT_EQ(extract_json("```json\n{\"a\":1}\n```")->at("a"), 1);
  EXPECT_EQ(extract_json("Sure! {\"a\": {\"b\": 2}} hope it helps")->at("a").at("b"), 2);
  EXPECT_FALSE(extract_json("no json here").has_value());
}

TEST(Structured, SchemaSelfCheck) {
  OutputSchema dup{"d", {{"a", FieldKind::String, true}, {"a", FieldKind::Integer, true}}};
  EXPECT_THROW(dup.validate_self(), PreconditionError);
}

TEST(Structured, NeverReturnsNonConforming) {
  // adversarial replies: the result must conform or the call must throw
  const std::vector<std::string> pool = {
      "garbage", "{}", R"({"stage":1,"objectives":[]})", R"({"stage":"a"})", R"({"objectives":[]})",
      R"({"stage":"a","objectives":"x"})", R"([1,2])", R"({"stage":"ok","objectives":["x"]})", "```json\n{}\n```"};
  evotest::Rng rng(11);
  for (int round = 0; round < 300; ++round) {
    FunctionBackend b([&](const ChatRequest&) {
      return ChatResponse{pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)], FinishReason::Stop, {}};
    });
    StructuredOptions o;
    o.max_repairs = round % 3;
    try {
      auto v = complete_structured(b, evotest::user_request("t", "x"), kPlanSchema, o);
      ASSERT_TRUE(looks_like_plan(v)) << v.dump();
    } catch (const StructuredOutputError&) {
    }
  }
}

TEST(Structured, BooleanAndIntegerKinds) {
  OutputSchema s{"s", {{"flag", FieldKind::Boolean, true}, {"n", FieldKind::Integer, false}}};
  EXPECT_FALSE(check_conformance(s, {{"flag", true}, {"n", 3}}).has_value());
  EXPECT_TRUE(check_conformance(s, {{"flag", "yes"}}).has_value());
  EXPECT_TRUE(check_conformance(s, {{"flag", false}, {"n", 2.5}}).has_value());
}

TEST(GatewayLogTest, DrainOrdersByScopeThenSeq) {
  auto log = std::make_shared<GatewayLog>();
  auto inner = evotest::scripted(json::array({{{"response", "ok"}}}));
  LoggingBackend b(inner, "counselor", log);
  std::vector<std::thread> threads;
  for (int s = 0; s < 4; ++s) {
    threads.emplace_back([&, s] {
      for (int i = 0; i < 5; ++i) {
        auto r = evotest::user_request("tag" + std::to_string(i), "x");
        r.labels["scope"] = "c" + std::to_string(s);
        complete(b, r);
      }
    });
  }
  for (auto& t : threads) t.join();
  auto entries = log->drain();
  ASSERT_EQ(entries.size(), 20u);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    EXPECT_EQ(entries[i].scope, "c" + std::to_string(i / 5));
    EXPECT_EQ(entries[i].tag, "tag" + std::to_string(i % 5));
  }
  EXPECT_EQ(log->count_tag("tag0"), 4u);
  EXPECT_TRUE(log->drain().empty());
  auto j = entries[0].to_json();
  for (const char* k : {"tag", "request_digest", "response", "latency_ms"}) EXPECT_TRUE(j.contains(k)) << k;
}

TEST(Http, StubBodyVerbatim) {
  const std::string content = "I hear how tired you are.";
  evotest::StubServer stub([&](const std::string&, const std::string&, int) {
    return evotest::StubReply{200, evotest::StubServer::completion(content)};
  });
  HttpBackendConfig cfg;
  cfg.endpoint = stub.url();
  cfg.model = "m";
  cfg.api_key = "sk-test";
  HttpBackend b(cfg);
  auto r = complete(b, evotest::user_request("t", "hello"));
  EXPECT_EQ(r.text, content);
  EXPECT_EQ(stub.last_authorization(), "Bearer sk-test");
  auto body = json::parse(stub.last_body());
  EXPECT_EQ(body["model"], "m");
  EXPECT_EQ(body["messages"][0]["content"], "hello");
  EXPECT_FALSE(body.contains("labels"));
}

TEST(Http, RetryCountIsRetriesPlusOne) {
  for (int retries : {0, 1, 3}) {
    evotest::StubServer stub([](const std::string&, const std::string&, int) { return evotest::StubReply{503, "{}"}; });
    HttpBackendConfig cfg;
    cfg.endpoint = stub.url();
    cfg.model = "m";
    cfg.max_retries = retries;
    cfg.backoff_initial_ms = 1;
    cfg.backoff_max_ms = 2;
    HttpBackend b(cfg);
    try {
      complete(b, evotest::user_request("t", "x"));
      FAIL();
    } catch (const TransportError& e) {
      EXPECT_EQ(e.attempts(), retries + 1);
    }
    EXPECT_EQ(stub.attempts(), retries + 1);
  }
}

TEST(Http, RecoversAfterTransientFailures) {
  evotest::StubServer stub([](const std::string&, const std::string&, int attempt) {
    if (attempt < 3) return evotest::StubReply{attempt == 1 ? 429 : 500, "{}"};
    return evotest::StubReply{200, evotest::StubServer::completion("fine")};
  });
  HttpBackendConfig cfg;
  cfg.endpoint = stub.url();
  cfg.model = "m";
  cfg.max_retries = 3;
  cfg.backoff_initial_ms = 1;
  HttpBackend b(cfg);
  EXPECT_EQ(complete(b, evotest::user_request("t", "x")).text, "fine");
  EXPECT_EQ(stub.attempts(), 3);
  EXPECT_EQ(HttpBackend::last_attempts(), 3);
}

TEST(Http, ClientErrorIsNotRetried) {
  evotest::StubServer stub([](const std::string&, const std::string&, int) { return evotest::StubReply{401, "{}"}; });
  HttpBackendConfig cfg;
  cfg.endpoint = stub.url();
  cfg.model = "m";
  cfg.max_retries = 4;
  cfg.backoff_initial_ms = 1;
  HttpBackend b(cfg);
  EXPECT_THROW(complete(b, evotest::user_request("t", "x")), TransportError);
  EXPECT_EQ(stub.attempts(), 1);
}

TEST(Http, Embeddings) {
  evotest::StubServer stub([](const std::string& path, const std::string&, int) {
    EXPECT_EQ(path, "/v1/embeddings");
    return evotest::StubReply{200, R"({"data":[{"embedding":[0.5,0.25,1]}]})"};
  });
  HttpBackendConfig cfg;
  cfg.endpoint = stub.url();
  cfg.model = "m";
  HttpBackend b(cfg);
  EXPECT_EQ(b.embed("x"), (std::vector<double>{0.5, 0.25, 1.0}));
}
