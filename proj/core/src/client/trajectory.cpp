#include "evocounsel/client/trajectory.hpp"

#include <set>
#include <sstream>

#include "evocounsel/common/errors.hpp"

namespace evocounsel::client {

std::string_view to_string(Direction d) { return d == Direction::LowerBetter ? "lower_better" : "higher_better"; }

Direction default_direction(std::string_view metric) {
  if (metric.find("negative") != std::string_view::npos || metric.find("distress") != std::string_view::npos)
    return Direction::LowerBetter;
  return Direction::HigherBetter;
}

TrajectoryReport trajectory_report(const std::vector<SessionObservation>& sessions,
                                   const std::map<std::string, Direction>& directions) {
  for (std::size_t i = 1; i < sessions.size(); ++i) {
    if (sessions[i].session_index != sessions[i - 1].session_index + 1)
      throw PreconditionError("trajectory_report: sessions must be contiguous");
  }
  std::set<std::string> metrics;
  for (const auto& s : sessions)
    for (const auto& [k, _] : s.values) metrics.insert(k);

  TrajectoryReport report;
  for (const auto& m : metrics) {
    auto it = directions.find(m);
    report.direction[m] = it != directions.end() ? it->second : default_direction(m);
    auto& points = report.series[m];
    for (const auto& s : sessions) {
      auto v = s.values.find(m);
      points.push_back({s.session_index, v == s.values.end() ? std::nullopt : std::optional<double>(v->second)});
    }
  }
  return report;
}

std::string TrajectoryReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "metric,direction,session_index,value\n";
  for (const auto& [metric, points] : series) {
    const auto dir = to_string(direction.at(metric));
    for (const auto& p : points) {
      out << metric << ',' << dir << ',' << p.session_index << ',';
      if (p.value) out << *p.value;
      out << '\n';
    }
  }
  return out.str();
}

nlohmann::json TrajectoryReport::to_json() const {
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [metric, points] : series) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points)
      pts.push_back({{"session_index", p.session_index}, {"value", p.value ? nlohmann::json(*p.value) : nlohmann::json()}});
    metrics[metric] = {{"direction", to_string(direction.at(metric))}, {"points", std::move(pts)}};
  }
  return {{"metrics", std::move(metrics)}};
}

}  // namespace evocounsel::client
