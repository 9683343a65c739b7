#include "evocounsel/rollout/reward.hpp"

#include <cmath>

#include "evocounsel/common/errors.hpp"

namespace evocounsel::rollout {

double RewardReport::recompute() const {
  double sum = 0.0;
  for (const auto& [dim, w] : weights) {
    auto it = dimension_scores.find(dim);
    if (it != dimension_scores.end()) sum += w * it->second;
  }
  return sum;
}

std::vector<std::string> RewardReport::validate() const {
  std::vector<std::string> issues;
  double total = 0.0;
  for (const auto& [dim, w] : weights) {
    if (w < 0) issues.push_back("weight for " + dim + " is negative");
    if (!dimension_scores.contains(dim)) issues.push_back("no score for weighted dimension " + dim);
    total += w;
  }
  if (!weights.empty() && std::abs(total - 1.0) > 1e-9) issues.push_back("weights do not sum to 1");
  for (const auto& [dim, s] : dimension_scores)
    if (s < client::kMinScore || s > client::kMaxScore) issues.push_back("score for " + dim + " outside [1,10]");
  if (std::abs(recompute() - aggregate) > 1e-9) issues.push_back("aggregate does not match weighted sum");
  return issues;
}

nlohmann::json RewardReport::to_json() const {
  return {{"dimension_scores", dimension_scores},
          {"weights", weights},
          {"aggregate", aggregate},
          {"clamp_events", clamp_events}};
}

RewardReport RewardReport::from_json(const nlohmann::json& j) {
  RewardReport r;
  r.dimension_scores = j.at("dimension_scores").get<std::map<std::string, double>>();
  r.weights = j.at("weights").get<std::map<std::string, double>>();
  r.aggregate = j.at("aggregate").get<double>();
  r.clamp_events = j.value("clamp_events", std::vector<std::string>{});
  return r;
}

RewardReport make_reward(const std::map<std::string, double>& scores, const std::map<std::string, double>& weights) {
  double total = 0.0;
  for (const auto& [dim, w] : weights) {
    if (w < 0) throw PreconditionError("make_reward: negative weight for " + dim);
    if (!scores.contains(dim)) throw PreconditionError("make_reward: no score for dimension " + dim);
    total += w;
  }
  if (total <= 0) throw PreconditionError("make_reward: weights sum to zero");
  RewardReport r;
  r.dimension_scores = scores;
  for (const auto& [dim, w] : weights) r.weights[dim] = w / total;
  r.aggregate = r.recompute();
  return r;
}

RewardReport score_session(gateway::Backend& judge, const memory::SessionTranscript& transcript,
                           const client::Rubric& rubric, const gateway::CallContext& call,
                           const client::JudgeOptions& options) {
  auto result = client::judge_dimensions(judge, transcript, rubric, call, options);
  std::map<std::string, double> weights;
  for (const auto& d : rubric.dimensions) weights[d.name] = d.weight;
  auto report = make_reward(result.scores, weights);
  report.clamp_events = std::move(result.clamp_events);
  return report;
}

}  // namespace evocounsel::rollout
