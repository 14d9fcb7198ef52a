#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rss/decompose.hpp"
#include "rss/paths.hpp"
#include "rss/random.hpp"

namespace rss {

enum class Policy : std::uint8_t { FlowGuided, RandomCA, ZoningCA };

const char* policy_name(Policy p);
Policy parse_policy(const std::string& name);  // "optimal", "ra", "zoning"

// (cell, tick) -> robot, plus cells held indefinitely by robots parked
// while they wait for their next plan.
class ReservationTable {
 public:
  explicit ReservationTable(int cells = 0) : ticks_(static_cast<std::size_t>(cells)), parked_(static_cast<std::size_t>(cells), {-1, 0}) {}

  bool free_at(int cell, int tick, int robot) const;
  // Free at every tick >= `tick` (nothing reserved later, nobody parked).
  bool free_from(int cell, int tick, int robot) const;
  int owner(int cell, int tick) const;  // -1 when free

  void reserve(int cell, int tick, int robot);
  void park(int cell, int tick, int robot);
  void release(int robot);               // all reservations and parking of robot
  void prune_before(int tick);
  std::size_t size() const;

 private:
  std::vector<std::map<int, int>> ticks_;
  std::vector<std::pair<int, int>> parked_;  // (robot, from tick)
  std::map<int, std::vector<std::pair<int, int>>> by_robot_;
};

enum class StepKind : std::uint8_t { Wait, Move, Turn, Exit, Enter, Drop };

struct Step {
  StepKind kind = StepKind::Wait;
  int node = -1;  // node after the step (the drop-off for Drop)
};

// Splits a node route (as produced by StaticRouter or a path-flow entry) into
// executable steps.
std::vector<Step> steps_from_route(const FlowNetwork& net, const std::vector<int>& route);

struct PlanGoal {
  int dropoff = 0;      // park next to it and drop
  int workstation = 0;  // or enter it
};

struct TimedPlan {
  int start_tick = 0;
  std::vector<Step> steps;
  std::vector<int> cells;  // occupied cell at each tick from start_tick + 1 (-1 inside a station)
  int end_tick() const { return start_tick + static_cast<int>(cells.size()); }
};

// Time-expanded A* from `start_node` (a cell-heading node or the robot's
// workstation) at tick t0. Reserves the result for `robot`; a drop plan also
// parks the robot on its final cell. Throws NoPathWithinHorizon.
TimedPlan ca_star_plan(const StaticRouter& router, ReservationTable& table, int robot, int start_node, PlanGoal goal,
                       int t0, int horizon, int drop_ticks);

struct MoveRequest {
  int robot = 0;
  int to_cell = 0;
};

struct TrafficDecision {
  std::vector<char> granted;                   // aligned with the request list
  std::vector<std::pair<int, int>> waits_for;  // (blocked robot, blocker)
};

// One-cell lookahead. `occupant[cell]` is the robot in each cell at the start
// of the tick. A request is granted when its cell is empty or being vacated;
// a fair draw settles contested cells; closed chains of requests all wait.
TrafficDecision traffic_control_step(const std::vector<MoveRequest>& requests, const std::vector<int>& occupant,
                                     Rng& rng);

// Directed cycles of a wait-for graph in which each robot waits on at most
// one other; each cycle listed once, starting at its lowest id.
std::vector<std::vector<int>> find_wait_cycles(const std::vector<std::pair<int, int>>& waits_for);

struct DeadlockOutcome {
  std::vector<int> rerouted;
  std::vector<std::vector<int>> unresolvable;
};

// Reroutes the lowest-id robot of each cycle that has a detour.
DeadlockOutcome detect_resolve_deadlocks(const std::vector<std::pair<int, int>>& waits_for,
                                         const std::function<bool(int)>& try_reroute);

// Drop-off -> workstation zone by shortest free-flow round trip.
std::vector<int> build_zones(const StaticRouter& router);
int policy_random_workstation(int n_workstations, Rng& rng);
// Zoning fleet split: robots are dealt round-robin to the workstations.
inline int robot_zone(int robot, int n_workstations) { return robot % n_workstations + 1; }

struct SimConfig {
  Policy policy = Policy::FlowGuided;
  int robots = 20;
  int ticks = 3000;
  std::uint64_t seed = 1;
  double warmup_fraction = 0.1;
  int horizon = 0;  // CA* horizon; 0 = 4x the longest free-flow trip
};

struct SafetyCounters {
  long occupancy_violations = 0;
  long non_adjacent_moves = 0;
  long duration_violations = 0;
  long reservation_violations = 0;
  bool ok() const {
    return occupancy_violations == 0 && non_adjacent_moves == 0 && duration_violations == 0 &&
           reservation_violations == 0;
  }
};

struct Metrics {
  double throughput = 0.0;  // drops per tick in the measurement window
  long drops = 0;
  long drops_in_window = 0;
  int window_start = 0;
  int ticks = 0;
  int deadlocks = 0;  // unresolvable cycles or stuck planners
  int reroutes = 0;
  bool flagged = false;
  long no_path_events = 0;
  long parcel_fallbacks = 0;
  double mean_trip_ticks = 0.0;  // load start to drop completion
  // Robot-ticks spent queued at a station, loading, moving, turning,
  // dropping, and standing still on the grid (denied, waiting, unplanned).
  long queued_ticks = 0, loading_ticks = 0, moving_ticks = 0, turning_ticks = 0, dropping_ticks = 0, blocked_ticks = 0;
  std::vector<long> arc_fwd;     // traversals per network arc, loaded robots
  std::vector<long> arc_bwd;     // empty robots
  std::vector<long> cell_turns;
  std::vector<long> cell_visits;
  std::vector<long> cell_waits;  // robot-ticks standing still on each cell
  SafetyCounters safety;
};

// The flow model lets an empty robot leave a drop-off from any neighbour; on
// the grid it drives away from the cell it dropped from. Throws
// UnreachableElement when such a cell has no route to any workstation.
void check_drop_exits(const StaticRouter& router);

// The split table is required for FlowGuided and ignored otherwise.
Metrics simulate(const FlowNetwork& net, const SplitTable* split, const TimingParams& timing, const SimConfig& config);

}  // namespace rss
