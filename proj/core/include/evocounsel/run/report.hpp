#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evocounsel/client/judge.hpp"
#include "evocounsel/client/trajectory.hpp"
#include "evocounsel/rollout/lifelong.hpp"

namespace evocounsel::run {

/// Per-session series from the winners: the last self-report of each metric
/// in the session, plus the winner's client-targeted judge scores.
client::TrajectoryReport trajectory_from_run(const rollout::LifelongRun& run, const client::Rubric& rubric);

/// report.json: per-dimension means over winning sessions, the aggregate
/// mean, per-session rows and the trajectory. An empty run gives the same
/// keys with empty values.
nlohmann::json build_report(const rollout::LifelongRun& run, const client::Rubric& rubric);

/// Side-by-side view keyed by ablation tag. Runs sharing a tag get "#2", "#3"...
nlohmann::json compare_reports(const std::vector<nlohmann::json>& reports);

}  // namespace evocounsel::run
