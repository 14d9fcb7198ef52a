#include <algorithm>
#include <queue>
#include <tuple>
#include <unordered_map>

#include "rss/errors.hpp"
#include "rss/sim.hpp"

namespace rss {

bool ReservationTable::free_at(int cell, int tick, int robot) const {
  const int o = owner(cell, tick);
  return o < 0 || o == robot;
}

int ReservationTable::owner(int cell, int tick) const {
  const auto& m = ticks_[static_cast<std::size_t>(cell)];
  if (auto it = m.find(tick); it != m.end()) return it->second;
  const auto [who, from] = parked_[static_cast<std::size_t>(cell)];
  return who >= 0 && tick >= from ? who : -1;
}

bool ReservationTable::free_from(int cell, int tick, int robot) const {
  const auto [who, from] = parked_[static_cast<std::size_t>(cell)];
  if (who >= 0 && who != robot) return false;
  const auto& m = ticks_[static_cast<std::size_t>(cell)];
  for (auto it = m.lower_bound(tick); it != m.end(); ++it)
    if (it->second != robot) return false;
  return true;
}

void ReservationTable::reserve(int cell, int tick, int robot) {
  ticks_[static_cast<std::size_t>(cell)][tick] = robot;
  by_robot_[robot].emplace_back(cell, tick);
}

void ReservationTable::park(int cell, int tick, int robot) {
  parked_[static_cast<std::size_t>(cell)] = {robot, tick};
  by_robot_[robot].emplace_back(cell, -1);
}

void ReservationTable::release(int robot) {
  auto it = by_robot_.find(robot);
  if (it == by_robot_.end()) return;
  for (auto [cell, tick] : it->second) {
    if (tick < 0) {
      if (parked_[static_cast<std::size_t>(cell)].first == robot) parked_[static_cast<std::size_t>(cell)] = {-1, 0};
      continue;
    }
    auto& m = ticks_[static_cast<std::size_t>(cell)];
    if (auto f = m.find(tick); f != m.end() && f->second == robot) m.erase(f);
  }
  by_robot_.erase(it);
}

void ReservationTable::prune_before(int tick) {
  for (auto& m : ticks_) m.erase(m.begin(), m.lower_bound(tick));
  for (auto& [robot, list] : by_robot_)
    std::erase_if(list, [&](const std::pair<int, int>& e) { return e.second >= 0 && e.second < tick; });
}

std::size_t ReservationTable::size() const {
  std::size_t n = 0;
  for (const auto& m : ticks_) n += m.size();
  return n;
}

std::vector<Step> steps_from_route(const FlowNetwork& net, const std::vector<int>& route) {
  std::vector<Step> steps;
  for (std::size_t i = 0; i + 1 < route.size(); ++i) {
    const int a = net.find_arc(route[i], route[i + 1]);
    if (a < 0) throw ConfigError("route uses a missing arc " + net.node_label(route[i]) + " -> " + net.node_label(route[i + 1]));
    StepKind kind = StepKind::Move;
    switch (net.arcs()[static_cast<std::size_t>(a)].kind) {
      case ArcKind::Move: kind = StepKind::Move; break;
      case ArcKind::Turn: kind = StepKind::Turn; break;
      case ArcKind::StationOut: kind = StepKind::Exit; break;
      case ArcKind::StationIn: kind = StepKind::Enter; break;
      case ArcKind::Drop: kind = StepKind::Drop; break;
      default: throw ConfigError("route uses a non-physical arc");
    }
    steps.push_back({kind, route[i + 1]});
  }
  return steps;
}

TimedPlan ca_star_plan(const StaticRouter& router, ReservationTable& table, int robot, int start_node, PlanGoal goal,
                       int t0, int horizon, int drop_ticks) {
  const FlowNetwork& net = router.network();
  const auto& h = goal.dropoff > 0 ? router.ticks_to_dropoff(goal.dropoff) : router.ticks_to_workstation(goal.workstation);
  const int goal_node = goal.dropoff > 0 ? net.dropoff_node(goal.dropoff) : net.workstation_node(goal.workstation);
  if (h[static_cast<std::size_t>(start_node)] >= StaticRouter::kUnreachable)
    throw NoPathWithinHorizon("goal unreachable from " + net.node_label(start_node));
  const int span = horizon + 1;
  auto key = [span](int node, int tau) { return static_cast<long long>(node) * span + tau; };

  struct Back {
    long long prev;
    StepKind kind;
  };
  std::unordered_map<long long, Back> back;
  std::unordered_map<long long, char> closed;
  // (f, -tau, node): deeper states first on equal f, then node id.
  using Item = std::tuple<int, int, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  open.emplace(h[static_cast<std::size_t>(start_node)], 0, start_node);
  back[key(start_node, 0)] = {-1, StepKind::Wait};

  auto push = [&](int node, int tau, long long from, StepKind kind) {
    if (tau > horizon) return;
    const int hv = h[static_cast<std::size_t>(node)];
    if (hv >= StaticRouter::kUnreachable) return;
    const long long k = key(node, tau);
    if (back.count(k)) return;
    back[k] = {from, kind};
    open.emplace(tau + hv, -tau, node);
  };

  long long found = -1;
  StepKind last = StepKind::Wait;
  while (!open.empty()) {
    auto [f, neg_tau, u] = open.top();
    open.pop();
    const int tau = -neg_tau;
    const long long k = key(u, tau);
    if (closed[k]) continue;
    closed[k] = 1;
    const int t = t0 + tau;
    const Node& node = net.nodes()[static_cast<std::size_t>(u)];
    const int cell = node.cell;

    if (cell >= 0) {
      const int goal_arc = net.find_arc(u, goal_node);
      if (goal_arc >= 0) {
        if (goal.dropoff > 0 && table.free_from(cell, t + 1, robot)) {
          found = k;
          last = StepKind::Drop;
          break;
        }
        if (goal.workstation > 0) {
          found = k;
          last = StepKind::Enter;
          break;
        }
      }
      if (table.free_at(cell, t + 1, robot)) push(u, tau + 1, k, StepKind::Wait);
    } else {
      push(u, tau + 1, k, StepKind::Wait);  // still inside the station
    }

    for (int a : net.out_arcs(u)) {
      if (!router.physical(a)) continue;
      const Arc& arc = net.arcs()[static_cast<std::size_t>(a)];
      const int next_cell = net.cell_of(arc.head);
      if (arc.kind == ArcKind::Turn) {
        bool ok = true;
        for (int d = 1; d <= router.turn_ticks() && ok; ++d) ok = table.free_at(cell, t + d, robot);
        if (ok) push(arc.head, tau + router.turn_ticks(), k, StepKind::Turn);
      } else if (arc.kind == ArcKind::Move || arc.kind == ArcKind::StationOut) {
        if (table.free_at(next_cell, t + 1, robot))
          push(arc.head, tau + 1, k, arc.kind == ArcKind::Move ? StepKind::Move : StepKind::Exit);
      }
    }
  }
  if (found < 0) throw NoPathWithinHorizon("no conflict-free path within " + std::to_string(horizon) + " ticks");

  // Unwind into (kind, node, tau) triples.
  std::vector<std::tuple<StepKind, int, int>> rev;
  for (long long k = found; back[k].prev >= 0; k = back[k].prev)
    rev.emplace_back(back[k].kind, static_cast<int>(k / span), static_cast<int>(k % span));
  std::reverse(rev.begin(), rev.end());

  TimedPlan plan;
  plan.start_tick = t0;
  int cur = start_node;
  int tau = 0;
  for (auto [kind, node, at] : rev) {
    plan.steps.push_back({kind, node});
    const int cell = net.cell_of(node);
    while (tau < at) {
      plan.cells.push_back(kind == StepKind::Turn || kind == StepKind::Wait ? net.cell_of(cur) : cell);
      ++tau;
    }
    cur = node;
  }
  plan.steps.push_back({last, goal_node});
  if (last == StepKind::Enter) plan.cells.push_back(-1);

  table.release(robot);
  for (std::size_t i = 0; i < plan.cells.size(); ++i)
    if (plan.cells[i] >= 0) table.reserve(plan.cells[i], t0 + 1 + static_cast<int>(i), robot);
  if (last == StepKind::Drop) {
    // Dropping and the wait for the return plan happen on the final cell.
    (void)drop_ticks;
    table.park(net.cell_of(cur), plan.end_tick(), robot);
  }
  return plan;
}

}  // namespace rss
