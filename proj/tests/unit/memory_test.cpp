#include <gtest/gtest.h>

#include <set>

#include "evocounsel/common/errors.hpp"
#include "evocounsel/memory/context.hpp"
#include "evocounsel/memory/memory_state.hpp"
#include "evocounsel/memory/sft.hpp"
#include "generators.hpp"
#include "scripts.hpp"

using namespace evocounsel;
using namespace evocounsel::memory;
using nlohmann::json;

namespace {

// Reference model of the profile update: plain maps, written from the contract.
struct RefProfile {
  std::map<std::string, std::tuple<std::string, int, int>> attrs;
  std::string narrative;
};

RefProfile ref_of(const ClientProfile& p) {
  RefProfile r;
  for (const auto& [k, a] : p.attributes) r.attrs[k] = {a.value, a.first_seen, a.last_updated};
  r.narrative = p.free_text;
  return r;
}

RefProfile ref_apply(RefProfile r, const ProfileDelta& d, int t) {
  for (const auto& [k, v] : d.upserts) {
    auto it = r.attrs.find(k);
    int first = it == r.attrs.end() ? t : std::get<1>(it->second);
    r.attrs[k] = {v, first, t};
  }
  for (const auto& k : d.removals) r.attrs.erase(k);
  if (d.narrative_patch) r.narrative = *d.narrative_patch;
  return r;
}

bool same(const RefProfile& r, const ClientProfile& p) {
  if (r.narrative != p.free_text || r.attrs.size() != p.attributes.size()) return false;
  for (const auto& [k, t] : r.attrs) {
    auto it = p.attributes.find(k);
    if (it == p.attributes.end()) return false;
    if (std::get<0>(t) != it->second.value || std::get<1>(t) != it->second.first_seen ||
        std::get<2>(t) != it->second.last_updated)
      return false;
  }
  return true;
}

SessionTranscript small_transcript(int index = 1) {
  SessionTranscript t;
  t.session_index = index;
  t.plan = SessionPlan{TherapeuticStage::CoreIntervention, {"Reinforce cognitive restructuring techniques"}};
  t.turns.push_back(ClientTurn{"I can't sleep", false, {}});
  t.turns.push_back(CounselorTurn{"z", "cbt.x", "Socratic Questioning", "What keeps you up?"});
  t.turns.push_back(ClientTurn{"Work.", true, {}});
  t.turns.push_back(CounselorTurn{"z2", "cbt.x", "Socratic Questioning", "Let's look at that next time."});
  return t;
}

skills::AtomicSkill socratic() {
  return {"cbt.core_intervention.cognitive_restructuring.socratic_questioning", "Socratic Questioning",
          "Ask open, guided questions.", "", ""};
}

}  // namespace

TEST(Profile, UpsertIntoEmpty) {
  ProfileDelta d;
  d.upserts = {{"sleep", "insomnia"}};
  auto p = update_profile({}, d, 2);
  ASSERT_EQ(p.attributes.size(), 1u);
  EXPECT_EQ(p.attributes.at("sleep").first_seen, 2);
  EXPECT_EQ(p.attributes.at("sleep").last_updated, 2);
}

TEST(Profile, EmptyDeltaIsIdentity) {
  ClientProfile p;
  p.attributes["a"] = {"1", 1, 1};
  EXPECT_EQ(update_profile(p, {}, 5), p);
}

TEST(Profile, UpsertExistingKeepsFirstSeen) {
  ClientProfile p;
  p.attributes["a"] = {"x", 1, 2};
  ProfileDelta d;
  d.upserts = {{"a", "y"}};
  auto out = update_profile(p, d, 3);
  EXPECT_TRUE(same(ref_apply(ref_of(p), d, 3), out));
  EXPECT_EQ(out.attributes.at("a").value, "y");
  EXPECT_EQ(out.attributes.at("a").first_seen, 1);
  EXPECT_EQ(out.attributes.at("a").last_updated, 3);
}

TEST(Profile, RemovingMissingKeyWarns) {
  ProfileDelta d;
  d.removals = {"caffeine"};
  std::vector<std::string> warnings;
  auto out = update_profile({}, d, 1, &warnings);
  EXPECT_TRUE(out.attributes.empty());
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("caffeine"), std::string::npos);
}

TEST(Profile, KeyInBothListsRejected) {
  ProfileDelta d;
  d.upserts = {{"sleep", "bad"}};
  d.removals = {"Sleep"};
  EXPECT_FALSE(d.validate().empty());
  EXPECT_THROW(update_profile({}, d, 1), ValidationError);
}

TEST(Profile, KeysNormalized) {
  ProfileDelta d;
  d.upserts = {{"Family Status", "recently divorced"}};
  auto p = update_profile({}, d, 1);
  EXPECT_EQ(p.attributes.count("family_status"), 1u);
}

TEST(Profile, RandomizedContracts) {
  evotest::Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const int t = 1 + static_cast<int>(rng() % 12);
    auto p = evotest::random_profile(rng, t);
    auto d = evotest::random_delta(rng);
    auto out = update_profile(p, d, t);
    ASSERT_TRUE(same(ref_apply(ref_of(p), d, t), out)) << "case " << i;
    for (const auto& [k, v] : d.upserts) {
      ASSERT_EQ(out.attributes.at(k).value, v);
      ASSERT_EQ(out.attributes.at(k).last_updated, t);
    }
    for (const auto& k : d.removals) ASSERT_EQ(out.attributes.count(k), 0u);
    std::set<std::string> touched;
    for (const auto& [k, v] : d.upserts) touched.insert(k);
    for (const auto& k : d.removals) touched.insert(k);
    for (const auto& [k, a] : p.attributes) {
      if (touched.count(k) == 0) ASSERT_EQ(to_json(out)["attributes"][k].dump(), to_json(p)["attributes"][k].dump());
    }
    ASSERT_EQ(update_profile(out, d, t), out) << "idempotence, case " << i;
    ASSERT_TRUE(out.validate(t).empty());
  }
}

TEST(Profile, JsonRoundTrip) {
  evotest::Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    auto p = evotest::random_profile(rng, 6);
    EXPECT_EQ(profile_from_json(to_json(p)), p);
    auto d = evotest::random_delta(rng);
    EXPECT_EQ(delta_from_json(to_json(d)), d);
  }
}

TEST(Memory, SummariesConsecutiveAndCapped) {
  MemoryState m;
  for (int i = 1; i <= 5; ++i) m = m.with_summary({i, "shift " + std::to_string(i), "outcome", {}}, 3);
  ASSERT_EQ(m.summaries.size(), 3u);
  EXPECT_EQ(m.summaries.front().session_index, 3);
  EXPECT_TRUE(m.validate().empty());
  EXPECT_NE(m.profile.free_text.find("[Session 1]"), std::string::npos);
  EXPECT_NE(m.profile.free_text.find("[Session 2]"), std::string::npos);
  EXPECT_THROW(m.with_summary({9, "", "", {}}), PreconditionError);
}

TEST(Memory, DigestIsContentAddress) {
  MemoryState a;
  a.profile.attributes["sleep"] = {"poor", 1, 1};
  MemoryState b = MemoryState::from_json(a.to_json());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_EQ(a.digest().size(), 64u);
  b.profile.attributes["sleep"].value = "better";
  EXPECT_NE(a.digest(), b.digest());
}

TEST(Plan, StageParsing) {
  EXPECT_EQ(parse_stage("Core Intervention"), TherapeuticStage::CoreIntervention);
  EXPECT_EQ(parse_stage("consolidation_and_prevention"), TherapeuticStage::ConsolidationAndPrevention);
  EXPECT_EQ(parse_stage("CaseConceptualization"), TherapeuticStage::CaseConceptualization);
  EXPECT_FALSE(parse_stage("Phase 9"));
  SessionPlan p{TherapeuticStage::CoreIntervention, {}};
  EXPECT_FALSE(p.validate(3).empty());
  p.objectives = {"a", "b", "c", "d"};
  EXPECT_FALSE(p.validate(3).empty());
}

TEST(Plan, FirstSessionPromptAndStage) {
  std::string prompt;
  gateway::FunctionBackend b([&](const gateway::ChatRequest& r) {
    prompt = r.prompt_text();
    return gateway::ChatResponse{R"({"stage":"Case Conceptualization","objectives":["Build rapport"]})",
                                 gateway::FinishReason::Stop, {}};
  });
  auto plan = reason_plan(b, MemoryState{}, 1);
  EXPECT_EQ(plan.stage, TherapeuticStage::CaseConceptualization);
  EXPECT_NE(prompt.find("first session"), std::string::npos);
}

TEST(Plan, ScriptedCoreIntervention) {
  auto b = evotest::scripted(json::array(
      {{{"tag", "plan_reasoning"},
        {"response", R"({"stage":"Core Intervention","objectives":["Reinforce cognitive restructuring techniques"]})"}}}));
  MemoryState m;
  m.profile.attributes["sleep"] = {"poor", 1, 1};
  auto plan = reason_plan(*b, m, 2);
  EXPECT_EQ(plan, (SessionPlan{TherapeuticStage::CoreIntervention, {"Reinforce cognitive restructuring techniques"}}));
}

TEST(Plan, UnknownStageFails) {
  auto b = evotest::scripted(json::array({{{"response", R"({"stage":"Phase 9","objectives":["x"]})"}}}));
  PlanOptions o;
  o.task.max_repairs = 0;
  EXPECT_THROW(reason_plan(*b, {}, 1, o), StructuredOutputError);
}

TEST(Context, MarkerSections) {
  MemoryState m;
  m.profile.attributes["sleep"] = {"poor", 1, 1};
  SessionPlan plan{TherapeuticStage::CoreIntervention, {"x"}};
  auto ctx = assemble_context("I can't sleep", m, plan, socratic());
  const std::string& sys = ctx.messages.front().text;
  for (const char* marker : {"[PLAN]", "[SKILL]", "[PROFILE]"}) EXPECT_NE(sys.find(marker), std::string::npos) << marker;
  EXPECT_NE(sys.find("[SKILL] Socratic Questioning:"), std::string::npos);
  EXPECT_EQ(ctx.messages.back().text, "I can't sleep");
}

TEST(Context, DiffersWhenMemoryDiffers) {
  MemoryState a, b;
  a.profile.attributes["sleep"] = {"poor", 1, 1};
  b.profile.attributes["sleep"] = {"good", 1, 1};
  SessionPlan plan{TherapeuticStage::CoreIntervention, {"x"}};
  auto ca = assemble_context("hi", a, plan, socratic());
  auto cb = assemble_context("hi", b, plan, socratic());
  EXPECT_NE(ca.memory_digest, cb.memory_digest);
  EXPECT_NE(ca.messages.front().text, cb.messages.front().text);
  EXPECT_EQ(ca.digest(), assemble_context("hi", a, plan, socratic()).digest());
}

TEST(Context, HistoryBeforeMessage) {
  auto t = small_transcript();
  std::vector<Turn> history(t.turns.begin(), t.turns.begin() + 2);
  auto ctx = assemble_context("Work.", {}, t.plan, socratic(), history);
  ASSERT_EQ(ctx.messages.size(), 4u);
  EXPECT_EQ(ctx.messages[1].text, "I can't sleep");
  EXPECT_EQ(ctx.messages[2].role, gateway::Role::Assistant);
}

TEST(Generate, ReasoningAndResponse) {
  auto b = evotest::scripted(json::array(
      {{{"tag", "response_generation"}, {"response", R"({"reasoning":"client minimizes","response":"It sounds exhausting..."})"}}}));
  auto ctx = assemble_context("I can't sleep", {}, {TherapeuticStage::CoreIntervention, {"x"}}, socratic());
  auto turn = generate_turn(*b, ctx, socratic());
  EXPECT_EQ(turn.reasoning, "client minimizes");
  EXPECT_EQ(turn.response, "It sounds exhausting...");
  EXPECT_EQ(turn.skill_ref, socratic().id);
  EXPECT_EQ(generate_turn(*b, ctx, socratic()), turn);
}

TEST(Generate, EmptyResponseFails) {
  auto b = evotest::scripted(json::array({{{"response", R"({"reasoning":"r","response":""})"}}}));
  auto ctx = assemble_context("x", {}, {TherapeuticStage::CoreIntervention, {"x"}}, socratic());
  EXPECT_THROW(generate_turn(*b, ctx, socratic()), StructuredOutputError);
}

TEST(Extract, OneUpsert) {
  const std::string literal = R"({"upserts":[["family_status","recently divorced"]],"removals":[]})";
  auto b = evotest::scripted(json::array({{{"tag", "attribute_extraction"}, {"response", literal}}}));
  auto d = extract_attributes(*b, small_transcript(), {});
  ASSERT_EQ(d.upserts.size(), 1u);
  EXPECT_EQ(d.upserts[0], (std::pair<std::string, std::string>{"family_status", "recently divorced"}));
  EXPECT_TRUE(d.validate().empty());
}

TEST(Extract, EmptyDelta) {
  auto b = evotest::scripted(json::array({{{"response", R"({"upserts":[],"removals":[]})"}}}));
  EXPECT_TRUE(extract_attributes(*b, small_transcript(), {}).empty());
}

TEST(Extract, UpsertReplacesDiagnosis) {
  auto b = evotest::scripted(json::array({{{"response", R"({"upserts":[["medical_diagnosis","type 2 diabetes"]],"removals":[]})"}}}));
  ClientProfile p;
  p.attributes["medical_diagnosis"] = {"none", 1, 1};
  auto out = update_profile(p, extract_attributes(*b, small_transcript(2), p), 2);
  EXPECT_EQ(out.attributes.at("medical_diagnosis").value, "type 2 diabetes");
}

TEST(Summary, IndexFromTranscript) {
  const json reply = {{"emotional_shifts", "calmer"}, {"intervention_outcomes", "engaged"}, {"key_events", {"named the worry"}}};
  auto b = evotest::scripted(json::array({{{"tag", "session_summary"}, {"response", reply}}}));
  auto s = summarize_session(*b, small_transcript(1), {});
  EXPECT_EQ(s.session_index, 1);
  EXPECT_EQ(s.key_events, std::vector<std::string>{"named the worry"});
  // structure is ours, fidelity is the backend's: same script, other transcript, same summary body
  auto s3 = summarize_session(*b, small_transcript(3), {});
  EXPECT_EQ(s3.emotional_shifts, s.emotional_shifts);
}

TEST(Summary, EmptyTranscriptRejected) {
  auto b = evotest::scripted(json::array({{{"response", "{}"}}}));
  SessionTranscript empty;
  empty.session_index = 1;
  EXPECT_THROW(summarize_session(*b, empty), PreconditionError);
}

TEST(Transcript, Validation) {
  auto t = small_transcript();
  EXPECT_TRUE(t.validate().empty());
  EXPECT_EQ(t.counselor_turns(), 2u);
  auto bad = t;
  std::swap(bad.turns[0], bad.turns[1]);
  EXPECT_FALSE(bad.validate().empty());
  auto early_end = t;
  std::get<ClientTurn>(early_end.turns[0]).end_signal = true;
  EXPECT_FALSE(early_end.validate().empty());
  EXPECT_EQ(transcript_from_json(to_json(t)), t);
}

TEST(Sft, TwoSessionsOfThreeTurns) {
  std::vector<SftSessionSource> sources;
  for (int s = 1; s <= 2; ++s) {
    SftSessionSource src;
    src.session_id = "t00" + std::to_string(s) + "-c000";
    src.session_index = s;
    src.transcript.session_index = s;
    src.transcript.plan = {TherapeuticStage::CoreIntervention, {"x"}};
    for (int k = 1; k <= 3; ++k) {
      src.transcript.turns.push_back(ClientTurn{"c" + std::to_string(k), k == 3, {}});
      src.transcript.turns.push_back(CounselorTurn{"z", "skill.a", "A", "r" + std::to_string(k)});
    }
    src.memory_before = MemoryState{};
    src.delta = ProfileDelta{};
    src.summary = SessionSummary{s, "e", "o", {}};
    sources.push_back(src);
  }
  auto recs = emit_sft_records(sources);
  // oracle: 2 sessions x (mem + plan) + 3 + 3 counselor turns
  ASSERT_EQ(recs.size(), 2u * 2u + 6u);
  std::map<SftTask, int> per;
  for (const auto& r : recs) per[r.task]++;
  EXPECT_EQ(per[SftTask::Mem], 2);
  EXPECT_EQ(per[SftTask::Plan], 2);
  EXPECT_EQ(per[SftTask::Resp], 6);

  const std::string text = serialize_sft(recs);
  EXPECT_EQ(text.rfind(std::string(kSftHeader), 0), 0u);
  auto parsed = parse_sft(text);
  ASSERT_EQ(parsed.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_EQ(parsed[i], recs[i]);
}

TEST(Sft, EmptyRunHeaderOnly) {
  const std::string text = serialize_sft({});
  EXPECT_EQ(text, std::string(kSftHeader) + "\n");
  EXPECT_TRUE(parse_sft(text).empty());
}

TEST(Sft, MissingAnnotationNamesSession) {
  SftSessionSource src;
  src.session_id = "t002-c001";
  src.session_index = 2;
  src.transcript = small_transcript(2);
  src.memory_before = MemoryState{};
  try {
    emit_sft_records(std::span<const SftSessionSource>(&src, 1));
    FAIL();
  } catch (const EmissionError& e) {
    EXPECT_NE(std::string(e.what()).find("t002-c001"), std::string::npos);
  }
}
