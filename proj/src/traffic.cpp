#include <algorithm>
#include <map>

#include "rss/errors.hpp"
#include "rss/sim.hpp"

namespace rss {

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::FlowGuided: return "optimal";
    case Policy::RandomCA: return "ra";
    case Policy::ZoningCA: return "zoning";
  }
  return "?";
}

Policy parse_policy(const std::string& name) {
  if (name == "optimal" || name == "flow") return Policy::FlowGuided;
  if (name == "ra" || name == "random") return Policy::RandomCA;
  if (name == "zoning") return Policy::ZoningCA;
  throw ConfigError("unknown policy '" + name + "' (expected optimal, ra or zoning)");
}

TrafficDecision traffic_control_step(const std::vector<MoveRequest>& requests, const std::vector<int>& occupant,
                                     Rng& rng) {
  TrafficDecision out;
  const std::size_t n = requests.size();
  out.granted.assign(n, 0);
  enum State : char { Pending, Granted, Denied };
  std::vector<char> state(n, Pending);

  // Contested cells: one winner by a uniform draw, everyone else waits on it.
  std::map<int, std::vector<std::size_t>> by_cell;
  for (std::size_t i = 0; i < n; ++i) by_cell[requests[i].to_cell].push_back(i);
  std::map<int, std::size_t> winner_of_robot;
  for (auto& [cell, list] : by_cell) {
    std::size_t w = list.front();
    if (list.size() > 1) w = list[static_cast<std::size_t>(uniform_below(rng, list.size()))];
    for (std::size_t i : list) {
      if (i == w) continue;
      state[i] = Denied;
      out.waits_for.emplace_back(requests[i].robot, requests[w].robot);
    }
    winner_of_robot[requests[w].robot] = w;
  }

  std::vector<int> blocker(n, -1);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (state[i] != Pending) continue;
      const int o = occupant[static_cast<std::size_t>(requests[i].to_cell)];
      char next = Pending;
      if (o < 0) {
        next = Granted;
      } else {
        auto it = winner_of_robot.find(o);
        if (it == winner_of_robot.end()) {
          next = Denied;  // occupant stays put (busy, idle or lost its draw)
        } else if (state[it->second] != Pending) {
          next = state[it->second];
        }
      }
      if (next != Pending) {
        state[i] = next;
        if (next == Denied) blocker[i] = o;
        changed = true;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (state[i] == Pending) {
      // A closed ring of robots each waiting on the next: nobody can see free space.
      state[i] = Denied;
      blocker[i] = occupant[static_cast<std::size_t>(requests[i].to_cell)];
    }
    out.granted[i] = state[i] == Granted;
    if (blocker[i] >= 0) out.waits_for.emplace_back(requests[i].robot, blocker[i]);
  }
  return out;
}

std::vector<std::vector<int>> find_wait_cycles(const std::vector<std::pair<int, int>>& waits_for) {
  std::map<int, int> next;
  for (auto [a, b] : waits_for) next.emplace(a, b);
  std::map<int, int> color;  // 1 on the current walk, 2 finished
  std::vector<std::vector<int>> cycles;
  for (const auto& [start, unused] : next) {
    (void)unused;
    if (color[start]) continue;
    std::vector<int> walk;
    int u = start;
    while (true) {
      color[u] = 1;
      walk.push_back(u);
      auto it = next.find(u);
      if (it == next.end()) break;
      const int v = it->second;
      if (color[v] == 1) {
        std::vector<int> cyc(std::find(walk.begin(), walk.end(), v), walk.end());
        std::rotate(cyc.begin(), std::min_element(cyc.begin(), cyc.end()), cyc.end());
        cycles.push_back(std::move(cyc));
        break;
      }
      if (color[v] == 2) break;
      u = v;
    }
    for (int x : walk) color[x] = 2;
  }
  std::sort(cycles.begin(), cycles.end());
  return cycles;
}

DeadlockOutcome detect_resolve_deadlocks(const std::vector<std::pair<int, int>>& waits_for,
                                         const std::function<bool(int)>& try_reroute) {
  DeadlockOutcome out;
  for (auto& cycle : find_wait_cycles(waits_for)) {
    std::vector<int> order = cycle;
    std::sort(order.begin(), order.end());
    bool done = false;
    for (int r : order) {
      if (try_reroute(r)) {
        out.rerouted.push_back(r);
        done = true;
        break;
      }
    }
    if (!done) out.unresolvable.push_back(std::move(cycle));
  }
  return out;
}

std::vector<int> build_zones(const StaticRouter& router) {
  const Layout& l = router.network().layout();
  std::vector<int> zone(static_cast<std::size_t>(l.dropoff_count()), 1);
  for (int d = 1; d <= l.dropoff_count(); ++d) {
    int best = StaticRouter::kUnreachable + 1;
    for (int w = 1; w <= l.workstation_count(); ++w) {
      const int rt = router.round_trip_ticks(w, d);
      if (rt < best) {
        best = rt;
        zone[static_cast<std::size_t>(d - 1)] = w;
      }
    }
  }
  return zone;
}

int policy_random_workstation(int n_workstations, Rng& rng) {
  if (n_workstations < 1) throw ConfigError("no workstations to assign to");
  return 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n_workstations)));
}

}  // namespace rss
