#include "evocounsel/run/report.hpp"

#include <map>

namespace evocounsel::run {

using nlohmann::json;

client::TrajectoryReport trajectory_from_run(const rollout::LifelongRun& run, const client::Rubric& rubric) {
  std::vector<client::SessionObservation> obs;
  std::map<std::string, client::Direction> directions;
  for (std::size_t i = 0; i < run.records.size() && i < run.winners.size(); ++i) {
    client::SessionObservation o;
    o.session_index = run.records[i].session_index;
    for (const auto& t : run.winners[i].transcript.turns) {
      if (const auto* c = std::get_if<memory::ClientTurn>(&t))
        for (const auto& [k, v] : c->self_report) o.values[k] = v;  // later reports overwrite earlier ones
    }
    if (const auto& reward = run.winners[i].reward) {
      for (const auto& d : rubric.dimensions) {
        if (d.target != client::DimensionTarget::Client) continue;
        auto it = reward->dimension_scores.find(d.name);
        if (it == reward->dimension_scores.end()) continue;
        o.values["judge." + d.name] = it->second;
        directions["judge." + d.name] = client::Direction::HigherBetter;
      }
    }
    obs.push_back(std::move(o));
  }
  return client::trajectory_report(obs, directions);
}

json build_report(const rollout::LifelongRun& run, const client::Rubric& rubric) {
  std::map<std::string, std::pair<double, int>> dims;
  double agg_sum = 0.0;
  int agg_n = 0;
  json sessions = json::array();
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    const auto& rec = run.records[i];
    json row = {{"session_index", rec.session_index},
                {"session_id", rec.session_id},
                {"winner_index", rec.winner_index},
                {"selector", rollout::to_string(rec.selector)},
                {"tie", rec.tie},
                {"candidates", rec.candidate_ids.size()},
                {"aggregate", nullptr},
                {"dimension_scores", json::object()},
                {"memory_after_id", rec.memory_after_id},
                {"tree_version_after", rec.tree_version_after},
                {"skill_update", rec.skill_update ? json(skills::to_string(rec.skill_update->action)) : json()}};
    if (i < run.winners.size() && run.winners[i].reward) {
      const auto& r = *run.winners[i].reward;
      row["aggregate"] = r.aggregate;
      row["dimension_scores"] = r.dimension_scores;
      agg_sum += r.aggregate;
      ++agg_n;
      for (const auto& [d, s] : r.dimension_scores) {
        dims[d].first += s;
        dims[d].second += 1;
      }
    }
    sessions.push_back(std::move(row));
  }
  json means = json::object();
  for (const auto& [d, acc] : dims) means[d] = acc.first / acc.second;
  for (const auto& d : rubric.dimensions)
    if (!means.contains(d.name)) means[d.name] = nullptr;

  return {{"run_id", run.run_id},
          {"config_digest", run.config_digest},
          {"ablation", run.flags.tag()},
          {"flags", run.flags.to_json()},
          {"sessions_completed", run.completed()},
          {"dimension_means", std::move(means)},
          {"aggregate_mean", agg_n ? json(agg_sum / agg_n) : json()},
          {"tree_version_initial", run.trees.empty() ? json() : json(run.trees.front().version)},
          {"tree_version_final", run.trees.empty() ? json() : json(run.trees.back().version)},
          {"sessions", std::move(sessions)},
          {"trajectory", trajectory_from_run(run, rubric).to_json()}};
}

json compare_reports(const std::vector<json>& reports) {
  json runs = json::object();
  json means = json::object();
  for (const auto& r : reports) {
    std::string tag = r.value("ablation", "full");
    if (runs.contains(tag)) {
      int k = 2;
      while (runs.contains(tag + "#" + std::to_string(k))) ++k;
      tag += "#" + std::to_string(k);
    }
    means[tag] = {{"dimension_means", r.at("dimension_means")}, {"aggregate_mean", r.at("aggregate_mean")}};
    runs[tag] = r;
  }
  return {{"tags", means}, {"runs", runs}};
}

}  // namespace evocounsel::run
