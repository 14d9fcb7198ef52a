#pragma once

#include <vector>

#include "rss/delay.hpp"

namespace rss {

// Free-flow routing over the arcs a robot can physically execute: Move,
// Turn, StationOut, StationIn and Drop (as a terminal arc into a drop-off).
// Costs are in ticks.
class StaticRouter {
 public:
  StaticRouter(const FlowNetwork& net, const TimingParams& timing);

  const FlowNetwork& network() const { return *net_; }
  int move_ticks() const { return move_; }
  int turn_ticks() const { return turn_; }
  int arc_ticks(int arc) const;
  bool physical(int arc) const;

  // Ticks from every node to the drop-off (inclusive of the Drop arc, which
  // costs 0) or workstation node; a large value marks unreachable.
  const std::vector<int>& ticks_to_dropoff(int dropoff) const { return to_dropoff_[static_cast<std::size_t>(dropoff - 1)]; }
  const std::vector<int>& ticks_to_workstation(int ws) const { return to_station_[static_cast<std::size_t>(ws - 1)]; }

  // Cheapest node sequence from `from` to `target`, skipping cell
  // `excluded_cell` (-1 for none). Empty when unreachable.
  std::vector<int> route(int from, int target, int excluded_cell = -1) const;
  // Cheapest route from `from` to any node with mask[node] != 0.
  std::vector<int> route_to_any(int from, const std::vector<char>& mask, int excluded_cell = -1) const;

  // Free-flow round trip W -> D -> W, leaving D from its best adjacent cell.
  int round_trip_ticks(int ws, int dropoff) const;
  // Longest one-way free-flow trip between any workstation and drop-off.
  int longest_trip_ticks() const;

  static constexpr int kUnreachable = 1 << 29;

 private:
  const FlowNetwork* net_;
  int move_ = 1;
  int turn_ = 4;
  std::vector<std::vector<int>> to_dropoff_;
  std::vector<std::vector<int>> to_station_;
};

// Integral tick count for a duration given in units of T1; throws ConfigError
// when the ratio is not a whole number.
int duration_ticks(double duration, double t1, const char* what);

}  // namespace rss
