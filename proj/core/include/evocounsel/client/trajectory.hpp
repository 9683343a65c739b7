#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace evocounsel::client {

enum class Direction { LowerBetter, HigherBetter };

std::string_view to_string(Direction d);
/// negative_affect (and anything containing "negative" or "distress") is lower-better.
Direction default_direction(std::string_view metric);

/// Metric values observed for one winning session.
struct SessionObservation {
  int session_index = 0;
  std::map<std::string, double> values;
};

struct TrajectoryPoint {
  int session_index = 0;
  std::optional<double> value;  // nullopt marks a gap; never interpolated

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

struct TrajectoryReport {
  std::map<std::string, std::vector<TrajectoryPoint>> series;
  std::map<std::string, Direction> direction;

  /// Header `metric,direction,session_index,value`; gaps leave value empty.
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// One point per observation per metric, in input order. A metric that is
/// absent from some session gets an explicit gap there.
TrajectoryReport trajectory_report(const std::vector<SessionObservation>& sessions,
                                   const std::map<std::string, Direction>& directions = {});

}  // namespace evocounsel::client
