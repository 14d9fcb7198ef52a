#include <algorithm>
#include <deque>
#include <set>

#include "rss/errors.hpp"
#include "rss/sim.hpp"

namespace rss {

namespace {

enum class Activity : std::uint8_t { Idle, Queued, Loading, Move, Turn, Drop, Exit, Enter, Wait };

struct Robot {
  int id = 0;
  int node = -1;  // cell-heading node, or the workstation node while inside
  int ws = 1;     // workstation it belongs to / is heading for
  int zone = 0;
  bool loaded = false;
  int dropoff = 0;
  std::vector<Step> steps;
  std::size_t next = 0;
  bool needs_plan = false;
  int stuck_since = -1;
  bool stuck_logged = false;
  int trip_start = 0;

  Activity activity = Activity::Queued;
  int action_end = 0;
  long action_id = 0;
  int pending_node = -1;  // node reached when a Turn completes

  // Safety bookkeeping.
  long run_id = -1;
  Activity run_kind = Activity::Idle;
  int run_length = 0;
  int last_cell = -1;  // grid cell at the previous snapshot (-1 in a station)
  int last_station_cell = -1;
};

class Simulator {
 public:
  Simulator(const FlowNetwork& net, const SplitTable* split, const TimingParams& timing, const SimConfig& cfg)
      : net_(net),
        layout_(net.layout()),
        split_(split),
        cfg_(cfg),
        router_(net, timing),
        table_(net.layout().cell_count()),
        policy_rng_(make_rng(cfg.seed, 1)),
        parcel_rng_(make_rng(cfg.seed, 2)),
        traffic_rng_(make_rng(cfg.seed, 3)) {
    if (cfg.robots < 0 || cfg.ticks < 0) throw ConfigError("robots and ticks must be nonnegative");
    if (layout_.workstation_count() < 1) throw ConfigError("layout has no workstations");
    if (layout_.dropoff_count() < 1) throw ConfigError("layout has no drop-offs");
    if (cfg.robots > layout_.cell_count()) throw ConfigError("more robots than cells");
    if (cfg.policy == Policy::FlowGuided && split_ == nullptr) throw ConfigError("flow-guided policy needs a split table");
    load_ticks_ = duration_ticks(timing.load_mean, timing.t1, "T_load");
    drop_ticks_ = duration_ticks(timing.drop_mean, timing.t1, "T_drop");
    turn_ticks_ = router_.turn_ticks();
    horizon_ = cfg.horizon > 0 ? cfg.horizon : 4 * router_.longest_trip_ticks();
    zones_ = build_zones(router_);
    check_drop_exits(router_);

    const int n_w = layout_.workstation_count();
    stations_.resize(static_cast<std::size_t>(n_w));
    for (int i = 0; i < cfg.robots; ++i) {
      Robot r;
      r.id = i;
      r.zone = robot_zone(i, n_w);
      r.ws = r.zone;
      r.node = net.workstation_node(r.ws);
      r.last_station_cell = layout_.workstation_cell(r.ws);
      robots_.push_back(r);
      stations_[static_cast<std::size_t>(r.ws - 1)].queue.push_back(i);
    }

    m_.ticks = cfg.ticks;
    m_.window_start = static_cast<int>(cfg.ticks * cfg.warmup_fraction);
    m_.arc_fwd.assign(static_cast<std::size_t>(net.arc_count()), 0);
    m_.arc_bwd.assign(static_cast<std::size_t>(net.arc_count()), 0);
    m_.cell_turns.assign(static_cast<std::size_t>(layout_.cell_count()), 0);
    m_.cell_visits.assign(static_cast<std::size_t>(layout_.cell_count()), 0);
    m_.cell_waits.assign(static_cast<std::size_t>(layout_.cell_count()), 0);
  }

  Metrics run() {
    for (int t = 0; t < cfg_.ticks; ++t) tick(t);
    const int window = cfg_.ticks - m_.window_start;
    m_.throughput = window > 0 ? static_cast<double>(m_.drops_in_window) / window : 0.0;
    m_.mean_trip_ticks = trips_ > 0 ? trip_sum_ / static_cast<double>(trips_) : 0.0;
    return m_;
  }

 private:
  struct Station {
    std::deque<int> queue;
    int worker = -1;  // robot being loaded or waiting to leave
  };

  bool ca_policy() const { return cfg_.policy != Policy::FlowGuided; }

  int cell_of_robot(const Robot& r) const { return net_.cell_of(r.node); }

  void count_arc(const Robot& r, int from, int to) {
    const int a = net_.find_arc(from, to);
    if (a < 0) return;
    (r.loaded ? m_.arc_fwd : m_.arc_bwd)[static_cast<std::size_t>(a)]++;
  }

  void start(Robot& r, Activity a, int t, int duration) {
    r.activity = a;
    r.action_end = t + duration;
    ++r.action_id;
  }

  // ---- policies -------------------------------------------------------

  // Parcel for workstation w drawn from the uniform global stream; parcels
  // the policy sends elsewhere belong to the other stations' backlogs.
  void pick_parcel(Robot& r, int w) {
    const int n_d = layout_.dropoff_count();
    const int w_node = net_.workstation_node(w);
    for (int tries = 0; tries < 10000; ++tries) {
      const int d = 1 + static_cast<int>(uniform_below(parcel_rng_, static_cast<std::uint64_t>(n_d)));
      switch (cfg_.policy) {
        case Policy::FlowGuided: {
          const PathFlow& p = split_->paths().entries[static_cast<std::size_t>(split_->draw(Direction::Forward, d, policy_rng_))];
          if (p.workstation != w) continue;
          r.dropoff = d;
          r.steps = steps_from_route(net_, std::vector<int>(p.nodes.begin() + 1, p.nodes.end() - 1));
          r.next = 0;
          return;
        }
        case Policy::RandomCA:
          if (policy_random_workstation(layout_.workstation_count(), policy_rng_) != w) continue;
          break;
        case Policy::ZoningCA:
          if (zones_[static_cast<std::size_t>(d - 1)] != w) continue;
          break;
      }
      r.dropoff = d;
      r.needs_plan = true;
      return;
    }
    ++m_.parcel_fallbacks;
    r.dropoff = 1 + static_cast<int>(uniform_below(parcel_rng_, static_cast<std::uint64_t>(n_d)));
    if (ca_policy()) {
      r.needs_plan = true;
    } else {
      r.steps = steps_from_route(net_, router_.route(w_node, net_.dropoff_node(r.dropoff)));
      r.next = 0;
    }
  }

  void pick_return(Robot& r) {
    switch (cfg_.policy) {
      case Policy::RandomCA:
        r.ws = policy_random_workstation(layout_.workstation_count(), policy_rng_);
        r.needs_plan = true;
        return;
      case Policy::ZoningCA:
        r.ws = r.zone;
        r.needs_plan = true;
        return;
      case Policy::FlowGuided: break;
    }
    const int cell = cell_of_robot(r);
    const auto& entries = split_->paths().entries;
    int e = split_->draw_backward_from(r.dropoff, cell, policy_rng_);
    std::vector<int> route;
    if (e >= 0) {
      const auto& nodes = entries[static_cast<std::size_t>(e)].nodes;
      route.assign(nodes.begin() + 2, nodes.end() - 1);
      if (route.front() != r.node) route.insert(route.begin(), r.node);  // turn in place first
    } else {
      // No return path starts here: join a drawn one by the cheapest connector.
      e = split_->draw(Direction::Backward, r.dropoff, policy_rng_);
      const auto& nodes = entries[static_cast<std::size_t>(e)].nodes;
      std::vector<int> tail(nodes.begin() + 2, nodes.end() - 1);
      std::vector<char> mask(static_cast<std::size_t>(net_.node_count()), 0);
      for (int n : tail)
        if (net_.cell_of(n) >= 0) mask[static_cast<std::size_t>(n)] = 1;
      route = router_.route_to_any(r.node, mask);
      if (!route.empty()) {
        auto at = std::find(tail.begin(), tail.end(), route.back());
        route.insert(route.end(), at + 1, tail.end());
      } else {
        route = router_.route(r.node, net_.workstation_node(entries[static_cast<std::size_t>(e)].workstation));
      }
      if (route.empty()) {
        int best = 1;
        for (int w = 2; w <= layout_.workstation_count(); ++w)
          if (router_.ticks_to_workstation(w)[static_cast<std::size_t>(r.node)] <
              router_.ticks_to_workstation(best)[static_cast<std::size_t>(r.node)])
            best = w;
        route = router_.route(r.node, net_.workstation_node(best));
      }
    }
    r.ws = net_.nodes()[static_cast<std::size_t>(route.back())].id;
    r.steps = steps_from_route(net_, route);
    r.next = 0;
  }

  // ---- CA* ----------------------------------------------------------------

  bool plan(Robot& r, int t) {
    PlanGoal goal;
    if (r.loaded)
      goal.dropoff = r.dropoff;
    else
      goal.workstation = r.ws;
    try {
      TimedPlan p = ca_star_plan(router_, table_, r.id, r.node, goal, t, horizon_, drop_ticks_);
      r.steps = std::move(p.steps);
      r.next = 0;
      r.needs_plan = false;
      r.stuck_since = -1;
      r.stuck_logged = false;
      return true;
    } catch (const NoPathWithinHorizon&) {
      ++m_.no_path_events;
      if (r.stuck_since < 0) r.stuck_since = t;
      if (t - r.stuck_since >= horizon_ && !r.stuck_logged) {
        r.stuck_logged = true;
        ++m_.deadlocks;
        m_.flagged = true;
      }
      const int cell = cell_of_robot(r);
      if (cell >= 0) {
        table_.release(r.id);
        table_.park(cell, t, r.id);
      }
      return false;
    }
  }

  // ---- flow-guided deadlock detours ---------------------------------------

  bool try_reroute(int id, int blocked_cell) {
    Robot& r = robots_[static_cast<std::size_t>(id)];
    const int target = r.loaded ? net_.dropoff_node(r.dropoff) : net_.workstation_node(r.ws);
    std::vector<int> route = router_.route(r.node, target, blocked_cell);
    if (route.size() < 2) return false;
    r.steps = steps_from_route(net_, route);
    r.next = 0;
    ++m_.reroutes;
    return true;
  }

  // ---- tick ---------------------------------------------------------------

  void complete(Robot& r, int t) {
    switch (r.activity) {
      case Activity::Loading:
        r.loaded = true;
        r.activity = Activity::Idle;
        break;
      case Activity::Turn:
        r.node = r.pending_node;
        r.activity = Activity::Idle;
        break;
      case Activity::Exit: {
        Station& s = stations_[static_cast<std::size_t>(r.ws - 1)];
        if (s.worker == r.id) s.worker = -1;
        r.activity = Activity::Idle;
        break;
      }
      case Activity::Drop:
        ++m_.drops;
        if (t >= m_.window_start) ++m_.drops_in_window;
        trip_sum_ += t - r.trip_start;
        ++trips_;
        r.loaded = false;
        r.activity = Activity::Idle;
        pick_return(r);
        break;
      case Activity::Enter: {
        count_arc(r, net_.workstation_node(r.ws), net_.source());
        r.activity = Activity::Queued;
        stations_[static_cast<std::size_t>(r.ws - 1)].queue.push_back(r.id);
        table_.release(r.id);
        break;
      }
      default: r.activity = Activity::Idle; break;
    }
  }

  void tick(int t) {
    for (Robot& r : robots_)
      if (r.activity != Activity::Queued && r.activity != Activity::Idle && r.action_end == t) complete(r, t);

    for (int w = 1; w <= static_cast<int>(stations_.size()); ++w) {
      Station& s = stations_[static_cast<std::size_t>(w - 1)];
      if (s.worker >= 0 || s.queue.empty()) continue;
      Robot& r = robots_[static_cast<std::size_t>(s.queue.front())];
      s.queue.pop_front();
      s.worker = r.id;
      r.ws = w;
      r.node = net_.workstation_node(w);
      r.trip_start = t;
      ++m_.arc_fwd[static_cast<std::size_t>(net_.find_arc(net_.source(), r.node))];
      pick_parcel(r, w);
      start(r, Activity::Loading, t, load_ticks_);
    }

    std::vector<MoveRequest> requests;
    std::vector<int> occupant(static_cast<std::size_t>(layout_.cell_count()), -1);
    for (const Robot& r : robots_)
      if (cell_of_robot(r) >= 0) occupant[static_cast<std::size_t>(cell_of_robot(r))] = r.id;

    for (Robot& r : robots_) {
      if (r.activity != Activity::Idle) continue;
      if (r.needs_plan && !plan(r, t)) continue;
      if (r.next >= r.steps.size()) continue;
      const Step& s = r.steps[r.next];
      const int cell = cell_of_robot(r);
      switch (s.kind) {
        case StepKind::Wait:
          ++r.next;
          start(r, Activity::Wait, t, 1);
          break;
        case StepKind::Turn:
          count_arc(r, r.node, s.node);
          ++m_.cell_turns[static_cast<std::size_t>(cell)];
          r.pending_node = s.node;
          ++r.next;
          start(r, Activity::Turn, t, turn_ticks_);
          break;
        case StepKind::Drop:
          count_arc(r, r.node, s.node);
          ++r.next;
          start(r, Activity::Drop, t, drop_ticks_);
          break;
        case StepKind::Enter:
          count_arc(r, r.node, s.node);
          occupant[static_cast<std::size_t>(cell)] = -1;
          r.node = s.node;
          r.ws = net_.nodes()[static_cast<std::size_t>(s.node)].id;
          ++r.next;
          start(r, Activity::Enter, t, 1);
          break;
        case StepKind::Move:
        case StepKind::Exit:
          requests.push_back({r.id, net_.cell_of(s.node)});
          break;
      }
    }

    std::vector<char> granted(requests.size(), 1);
    std::vector<std::pair<int, int>> waits;
    if (!ca_policy() && !requests.empty()) {
      TrafficDecision d = traffic_control_step(requests, occupant, traffic_rng_);
      granted = d.granted;
      waits = std::move(d.waits_for);
    }
    for (std::size_t i = 0; i < requests.size(); ++i) {
      Robot& r = robots_[static_cast<std::size_t>(requests[i].robot)];
      const Step& s = r.steps[r.next];
      if (ca_policy() && table_.owner(requests[i].to_cell, t + 1) != r.id) ++m_.safety.reservation_violations;
      if (!granted[i]) continue;
      count_arc(r, r.node, s.node);
      ++m_.cell_visits[static_cast<std::size_t>(requests[i].to_cell)];
      const bool exit = s.kind == StepKind::Exit;
      r.node = s.node;
      ++r.next;
      start(r, exit ? Activity::Exit : Activity::Move, t, 1);
    }

    if (!ca_policy() && !waits.empty()) {
      std::map<int, int> blocked_cell;
      for (std::size_t i = 0; i < requests.size(); ++i)
        if (!granted[i]) blocked_cell[requests[i].robot] = requests[i].to_cell;
      DeadlockOutcome out = detect_resolve_deadlocks(
          waits, [&](int id) { return blocked_cell.count(id) && try_reroute(id, blocked_cell[id]); });
      for (auto& cyc : out.unresolvable) {
        if (logged_cycles_.insert(cyc).second) {
          ++m_.deadlocks;
          m_.flagged = true;
        }
      }
    }

    if (ca_policy() && t % 64 == 0) table_.prune_before(t);
    check_safety(t);
  }

  // Snapshot of [t, t+1): occupancy, adjacency and action durations.
  void check_safety(int t) {
    (void)t;
    std::vector<int> seen(static_cast<std::size_t>(layout_.cell_count()), 0);
    for (Robot& r : robots_) {
      switch (r.activity) {
        case Activity::Queued: ++m_.queued_ticks; break;
        case Activity::Loading: ++m_.loading_ticks; break;
        case Activity::Move:
        case Activity::Exit:
        case Activity::Enter: ++m_.moving_ticks; break;
        case Activity::Turn: ++m_.turning_ticks; break;
        case Activity::Drop: ++m_.dropping_ticks; break;
        default:
          ++m_.blocked_ticks;
          if (cell_of_robot(r) >= 0) ++m_.cell_waits[static_cast<std::size_t>(cell_of_robot(r))];
          break;
      }
      const int cell = cell_of_robot(r);
      if (cell >= 0 && ++seen[static_cast<std::size_t>(cell)] > 1) ++m_.safety.occupancy_violations;
      // Position compared against the previous snapshot; stations count as
      // their grid cell for adjacency.
      const int here = cell >= 0 ? cell : layout_.workstation_cell(net_.nodes()[static_cast<std::size_t>(r.node)].id);
      const int before = r.last_cell >= 0 ? r.last_cell : r.last_station_cell;
      if (before >= 0 && here != before) {
        const Coord a = layout_.coord(before), b = layout_.coord(here);
        if (std::abs(a.row - b.row) + std::abs(a.col - b.col) != 1) ++m_.safety.non_adjacent_moves;
      }
      r.last_cell = cell;
      r.last_station_cell = cell >= 0 ? -1 : here;

      const bool timed = r.activity == Activity::Loading || r.activity == Activity::Turn ||
                         r.activity == Activity::Drop || r.activity == Activity::Move ||
                         r.activity == Activity::Exit || r.activity == Activity::Enter;
      if (r.run_id >= 0 && r.run_id != r.action_id) {
        if (r.run_length != expected_ticks(r.run_kind)) ++m_.safety.duration_violations;
        r.run_id = -1;
      }
      if (timed) {
        if (r.run_id == r.action_id) {
          ++r.run_length;
        } else {
          r.run_id = r.action_id;
          r.run_kind = r.activity;
          r.run_length = 1;
        }
      }
    }
  }

  int expected_ticks(Activity a) const {
    switch (a) {
      case Activity::Loading: return load_ticks_;
      case Activity::Turn: return turn_ticks_;
      case Activity::Drop: return drop_ticks_;
      default: return 1;
    }
  }

  const FlowNetwork& net_;
  const Layout& layout_;
  const SplitTable* split_;
  SimConfig cfg_;
  StaticRouter router_;
  ReservationTable table_;
  Rng policy_rng_;
  Rng parcel_rng_;
  Rng traffic_rng_;
  int load_ticks_ = 3;
  int drop_ticks_ = 1;
  int turn_ticks_ = 4;
  int horizon_ = 0;
  std::vector<int> zones_;
  std::vector<Robot> robots_;
  std::vector<Station> stations_;
  std::set<std::vector<int>> logged_cycles_;
  Metrics m_;
  double trip_sum_ = 0.0;
  long trips_ = 0;
};

}  // namespace

void check_drop_exits(const StaticRouter& router) {
  const FlowNetwork& net = router.network();
  for (const Arc& a : net.arcs()) {
    if (a.kind != ArcKind::Drop) continue;
    bool exit = false;
    for (int w = 1; w <= net.layout().workstation_count(); ++w)
      exit = exit || router.ticks_to_workstation(w)[static_cast<std::size_t>(a.tail)] < StaticRouter::kUnreachable;
    if (!exit) throw UnreachableElement(net.node_label(a.tail) + " (no way back to a workstation after dropping)");
  }
}

Metrics simulate(const FlowNetwork& net, const SplitTable* split, const TimingParams& timing, const SimConfig& config) {
  timing.validate();
  Simulator sim(net, split, timing, config);
  return sim.run();
}

}  // namespace rss
