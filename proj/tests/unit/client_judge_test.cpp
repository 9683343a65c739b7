#include <gtest/gtest.h>

#include <sstream>

#include "evocounsel/client/card.hpp"
#include "evocounsel/client/judge.hpp"
#include "evocounsel/client/simulator.hpp"
#include "evocounsel/client/trajectory.hpp"
#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/files.hpp"
#include "scripts.hpp"
#include "temp_dir.hpp"

using namespace evocounsel;
using namespace evocounsel::client;
using nlohmann::json;

namespace {

ClientProfileCard card() {
  ClientProfileCard c;
  c.card_id = "cbt-test";
  c.demographics = {{"age", "34"}};
  c.presenting_problem = "insomnia and work worry";
  c.therapy_school = TherapySchool::CBT;
  c.personality_notes = "self-critical";
  c.distress_baseline = 7;
  return c;
}

memory::SessionTranscript transcript() {
  memory::SessionTranscript t;
  t.session_index = 1;
  t.turns.push_back(memory::ClientTurn{"I slept badly again", false, {}});
  t.turns.push_back(memory::CounselorTurn{"z", "s", "S", "Tell me more."});
  return t;
}

Rubric one_dim(const std::string& name) {
  return Rubric{{RubricDimension{name, "warmth and accurate reflection", 1.0, DimensionTarget::Counselor, name}}};
}

std::vector<std::string> csv_rows(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  return rows;
}

}  // namespace

TEST(Cards, SamplePackLoads) {
  auto cards = load_cards(default_cards_path());
  ASSERT_EQ(cards.size(), 10u);
  std::map<TherapySchool, int> per;
  for (const auto& c : cards) {
    EXPECT_TRUE(c.validate().empty()) << c.card_id;
    per[c.therapy_school]++;
    EXPECT_EQ(card_from_json(to_json(c)), c);
  }
  for (auto s : {TherapySchool::BT, TherapySchool::CBT, TherapySchool::PMT, TherapySchool::HET, TherapySchool::PDT})
    EXPECT_EQ(per[s], 2);
}

TEST(Cards, InvalidRejected) {
  auto c = card();
  c.distress_baseline = 11;
  EXPECT_FALSE(c.validate().empty());
  evotest::TempDir dir;
  files::write_json(dir / "c.json", to_json(c));
  EXPECT_THROW(load_cards(dir / "c.json"), ValidationError);
  EXPECT_FALSE(parse_school("XYZ"));
  EXPECT_EQ(root_id_for(TherapySchool::HET), "het");
}

TEST(Simulator, ScriptedTurn) {
  auto b = evotest::scripted(
      json::array({{{"tag", "client_turn"}, {"response", R"({"text":"I slept badly again","end_signal":false})"}}}));
  auto t = simulate_client_turn(*b, card(), {});
  EXPECT_EQ(t.text, "I slept badly again");
  EXPECT_FALSE(t.end_signal);
  EXPECT_TRUE(t.self_report.empty());
  EXPECT_EQ(simulate_client_turn(*b, card(), {}), t);
}

TEST(Simulator, EndSignalAndSelfReport) {
  auto b = evotest::scripted(json::array(
      {{{"response", {{"text", "bye"}, {"end_signal", true}, {"self_report", {{"negative_affect", 4}}}}}}}));
  auto t = simulate_client_turn(*b, card(), {});
  EXPECT_TRUE(t.end_signal);
  EXPECT_DOUBLE_EQ(t.self_report.at("negative_affect"), 4.0);
}

TEST(Simulator, PersonaFromCard) {
  const auto p = persona_prompt(card());
  EXPECT_NE(p.find("insomnia and work worry"), std::string::npos);
  EXPECT_NE(p.find("self-critical"), std::string::npos);
  auto bad = card();
  bad.presenting_problem.clear();
  auto b = evotest::scripted(json::array({{{"response", R"({"text":"x"})"}}}));
  EXPECT_THROW(simulate_client_turn(*b, bad, {}), PreconditionError);
}

TEST(Judge, BareNumber) {
  auto b = evotest::scripted(json::array({{{"tag", "judge"}, {"response", "8"}}}));
  auto r = judge_dimensions(*b, transcript(), one_dim("empathy"));
  EXPECT_DOUBLE_EQ(r.scores.at("empathy"), 8.0);
  EXPECT_TRUE(r.clamp_events.empty());
  EXPECT_EQ(r.calls, 1);
}

TEST(Judge, ClampsWithEvent) {
  auto b = evotest::scripted(json::array({{{"response", "11"}}}));
  auto r = judge_dimensions(*b, transcript(), one_dim("empathy"));
  EXPECT_DOUBLE_EQ(r.scores.at("empathy"), 10.0);
  ASSERT_EQ(r.clamp_events.size(), 1u);
  EXPECT_NE(r.clamp_events[0].find("empathy"), std::string::npos);
}

TEST(Judge, StrictModeRejects) {
  auto b = evotest::scripted(json::array({{{"response", "0"}}}));
  JudgeOptions o;
  o.strict = true;
  o.task.max_repairs = 1;
  EXPECT_THROW(judge_dimensions(*b, transcript(), one_dim("empathy"), {}, o), ScoringError);
  EXPECT_EQ(b->calls(), 2u);
}

TEST(Judge, EmptyInputs) {
  auto b = evotest::scripted(json::array({{{"response", "5"}}}));
  EXPECT_THROW(judge_dimensions(*b, memory::SessionTranscript{}, one_dim("e")), PreconditionError);
  EXPECT_THROW(judge_dimensions(*b, transcript(), Rubric{}), PreconditionError);
}

TEST(Judge, PromptCarriesDefinitionAndTranscript) {
  std::string prompt;
  gateway::FunctionBackend b([&](const gateway::ChatRequest& r) {
    prompt = r.prompt_text();
    return gateway::ChatResponse{"7", gateway::FinishReason::Stop, {}};
  });
  judge_dimensions(b, transcript(), one_dim("empathy"));
  EXPECT_NE(prompt.find("warmth and accurate reflection"), std::string::npos);
  EXPECT_NE(prompt.find("I slept badly again"), std::string::npos);
}

TEST(Judge, OneCallPerGroup) {
  Rubric r{{{"a", "d", 1, DimensionTarget::Counselor, "g1"},
            {"b", "d", 1, DimensionTarget::Counselor, "g1"},
            {"c", "d", 1, DimensionTarget::Client, "g2"}}};
  EXPECT_EQ(r.groups().size(), 2u);
  auto b = evotest::scripted(json::array({{{"contains", {"- a ("}}, {"response", R"({"a":3,"b":4})"}},
                                          {{"response", R"({"c":5})"}}}));
  auto res = judge_dimensions(*b, transcript(), r);
  EXPECT_EQ(res.calls, 2);
  EXPECT_EQ(res.scores, (std::map<std::string, double>{{"a", 3}, {"b", 4}, {"c", 5}}));
}

TEST(Rubrics, DefaultAndFile) {
  auto d = default_rubric();
  EXPECT_EQ(d.dimensions.size(), 4u);
  for (const auto& [k, w] : d.normalized_weights()) EXPECT_DOUBLE_EQ(w, 0.25) << k;
  auto shipped = Rubric::load(std::filesystem::path(EVOCOUNSEL_DATA_DIR) / "rubric_default.json");
  EXPECT_TRUE(shipped.validate().empty());
  EXPECT_EQ(Rubric::from_json(d.to_json()), d);
  Rubric zero{{{"a", "d", 0, DimensionTarget::Counselor, "a"}}};
  EXPECT_FALSE(zero.validate().empty());
}

TEST(Trajectory, NegativeAffectSeries) {
  std::vector<SessionObservation> obs = {{1, {{"negative_affect", 8}}}, {2, {{"negative_affect", 6}}}, {3, {{"negative_affect", 5}}}};
  auto r = trajectory_report(obs);
  EXPECT_EQ(r.direction.at("negative_affect"), Direction::LowerBetter);
  const auto rows = csv_rows(r.to_csv());
  const std::vector<std::string> expected = {"metric,direction,session_index,value",
                                             "negative_affect,lower_better,1,8",
                                             "negative_affect,lower_better,2,6",
                                             "negative_affect,lower_better,3,5"};
  EXPECT_EQ(rows, expected);
  auto j = r.to_json();
  EXPECT_EQ(j["metrics"]["negative_affect"]["direction"], "lower_better");
  EXPECT_EQ(j["metrics"]["negative_affect"]["points"].size(), 3u);
}

TEST(Trajectory, SinglePointAndGap) {
  auto single = trajectory_report({{1, {{"positive_affect", 4}}}});
  EXPECT_EQ(single.series.at("positive_affect").size(), 1u);
  EXPECT_EQ(single.direction.at("positive_affect"), Direction::HigherBetter);

  auto gap = trajectory_report({{1, {{"negative_affect", 8}}}, {2, {}}, {3, {{"negative_affect", 5}}}});
  const auto& s = gap.series.at("negative_affect");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_FALSE(s[1].value.has_value());
  EXPECT_EQ(csv_rows(gap.to_csv())[2], "negative_affect,lower_better,2,");
  EXPECT_TRUE(gap.to_json()["metrics"]["negative_affect"]["points"][1]["value"].is_null());
}

TEST(Trajectory, ExactValuesPreserved) {
  auto r = trajectory_report({{1, {{"m", 0.1}}}, {2, {{"m", 1.0 / 3.0}}}});
  EXPECT_EQ(*r.series.at("m")[1].value, 1.0 / 3.0);
  // CSV value parses back to the same double
  auto row = csv_rows(r.to_csv())[2];
  EXPECT_EQ(std::stod(row.substr(row.rfind(',') + 1)), 1.0 / 3.0);
}

TEST(Trajectory, NonContiguousRejected) {
  EXPECT_THROW(trajectory_report({{1, {{"m", 1}}}, {3, {{"m", 2}}}}), Error);
}
