#include <benchmark/benchmark.h>

#include <optional>
#include <random>
#include <vector>

#include "evocounsel/common/digest.hpp"
#include "evocounsel/rollout/selection.hpp"
#include "evocounsel/skills/evolution.hpp"
#include "evocounsel/skills/similarity.hpp"
#include "evocounsel/skills/skill_tree.hpp"

using namespace evocounsel;

static void BM_SelectBest(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1.0, 10.0);
  std::vector<std::optional<double>> v(static_cast<std::size_t>(state.range(0)));
  for (auto& x : v) x = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(rollout::select_best(std::span<const std::optional<double>>(v)));
}
BENCHMARK(BM_SelectBest)->Arg(4)->Arg(16)->Arg(256);

static void BM_TokenSetCosine(benchmark::State& state) {
  const std::string a =
      "Socratic Questioning: ask open questions that lead the client to examine the evidence for an automatic thought";
  const std::string b =
      "Guided discovery: help the client test a belief by weighing the evidence for and against it with open questions";
  for (auto _ : state) benchmark::DoNotOptimize(skills::token_set_cosine(a, b));
}
BENCHMARK(BM_TokenSetCosine);

static void BM_ApplyAppend(benchmark::State& state) {
  const auto tree = skills::load_tree(skills::default_seed_tree_path());
  skills::SkillUpdate u;
  u.draft = {"Worry Timeline Sketch", "Sketch when the worry started.", "", "",
             "cbt.case_conceptualization.cognitive_assessment", "t001-c000"};
  for (auto _ : state) benchmark::DoNotOptimize(skills::apply_update(tree, u));
}
BENCHMARK(BM_ApplyAppend);

static void BM_TreeDigest(benchmark::State& state) {
  const auto j = skills::to_json(skills::load_tree(skills::default_seed_tree_path()));
  for (auto _ : state) benchmark::DoNotOptimize(json_digest(j));
}
BENCHMARK(BM_TreeDigest);

BENCHMARK_MAIN();
