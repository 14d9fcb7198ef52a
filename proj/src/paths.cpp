#include "rss/paths.hpp"

#include <cmath>
#include <queue>

#include "rss/errors.hpp"

namespace rss {

int duration_ticks(double duration, double t1, const char* what) {
  const double r = duration / t1;
  const double n = std::round(r);
  if (n < 1 || std::abs(r - n) > 1e-9)
    throw ConfigError(std::string(what) + " must be a positive whole multiple of T1");
  return static_cast<int>(n);
}

StaticRouter::StaticRouter(const FlowNetwork& net, const TimingParams& timing) : net_(&net) {
  move_ = duration_ticks(timing.t1, timing.t1, "T1");
  turn_ = duration_ticks(timing.t2, timing.t1, "T2");
  auto reverse_ticks = [&](int target) {
    std::vector<int> dist(static_cast<std::size_t>(net.node_count()), kUnreachable);
    using Item = std::pair<int, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[static_cast<std::size_t>(target)] = 0;
    heap.emplace(0, target);
    while (!heap.empty()) {
      auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[static_cast<std::size_t>(u)]) continue;
      for (int a : net.in_arcs(u)) {
        if (!physical(a)) continue;
        const int v = net.arcs()[static_cast<std::size_t>(a)].tail;
        const int nd = d + arc_ticks(a);
        if (nd < dist[static_cast<std::size_t>(v)]) {
          dist[static_cast<std::size_t>(v)] = nd;
          heap.emplace(nd, v);
        }
      }
    }
    return dist;
  };
  for (int d = 1; d <= net.layout().dropoff_count(); ++d) to_dropoff_.push_back(reverse_ticks(net.dropoff_node(d)));
  for (int w = 1; w <= net.layout().workstation_count(); ++w) to_station_.push_back(reverse_ticks(net.workstation_node(w)));
}

bool StaticRouter::physical(int arc) const {
  switch (net_->arcs()[static_cast<std::size_t>(arc)].kind) {
    case ArcKind::Move:
    case ArcKind::Turn:
    case ArcKind::StationOut:
    case ArcKind::StationIn:
    case ArcKind::Drop: return true;
    default: return false;
  }
}

int StaticRouter::arc_ticks(int arc) const {
  switch (net_->arcs()[static_cast<std::size_t>(arc)].kind) {
    case ArcKind::Turn: return turn_;
    case ArcKind::Drop: return 0;
    default: return move_;
  }
}

std::vector<int> StaticRouter::route_to_any(int from, const std::vector<char>& mask, int excluded_cell) const {
  const FlowNetwork& net = *net_;
  const auto n = static_cast<std::size_t>(net.node_count());
  std::vector<int> dist(n, kUnreachable);
  std::vector<int> pred(n, -1);
  std::vector<char> done(n, 0);
  using Item = std::pair<int, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[static_cast<std::size_t>(from)] = 0;
  heap.emplace(0, from);
  int hit = -1;
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (done[static_cast<std::size_t>(u)]) continue;
    done[static_cast<std::size_t>(u)] = 1;
    if (mask[static_cast<std::size_t>(u)]) {
      hit = u;
      break;
    }
    for (int a : net.out_arcs(u)) {
      if (!physical(a)) continue;
      const int v = net.arcs()[static_cast<std::size_t>(a)].head;
      if (excluded_cell >= 0 && net.cell_of(v) == excluded_cell) continue;
      // Drop-offs are terminal; only pass through one that is the target.
      if (net.nodes()[static_cast<std::size_t>(u)].kind == NodeKind::DropOff) continue;
      const auto vi = static_cast<std::size_t>(v);
      const int nd = d + arc_ticks(a);
      if (!done[vi] && (nd < dist[vi] || (nd == dist[vi] && a < pred[vi]))) {
        dist[vi] = nd;
        pred[vi] = a;
        heap.emplace(nd, v);
      }
    }
  }
  if (hit < 0) return {};
  std::vector<int> path{hit};
  for (int v = hit; v != from;) {
    v = net.arcs()[static_cast<std::size_t>(pred[static_cast<std::size_t>(v)])].tail;
    path.push_back(v);
  }
  return {path.rbegin(), path.rend()};
}

std::vector<int> StaticRouter::route(int from, int target, int excluded_cell) const {
  std::vector<char> mask(static_cast<std::size_t>(net_->node_count()), 0);
  mask[static_cast<std::size_t>(target)] = 1;
  return route_to_any(from, mask, excluded_cell);
}

int StaticRouter::round_trip_ticks(int ws, int dropoff) const {
  const FlowNetwork& net = *net_;
  const int out = ticks_to_dropoff(dropoff)[static_cast<std::size_t>(net.workstation_node(ws))];
  int back = kUnreachable;
  for (int a : net.in_arcs(net.dropoff_node(dropoff))) {
    if (net.arcs()[static_cast<std::size_t>(a)].kind != ArcKind::Drop) continue;
    back = std::min(back, ticks_to_workstation(ws)[static_cast<std::size_t>(net.arcs()[static_cast<std::size_t>(a)].tail)]);
  }
  return std::min(kUnreachable, out + back);
}

int StaticRouter::longest_trip_ticks() const {
  const FlowNetwork& net = *net_;
  int longest = 1;
  for (int d = 1; d <= net.layout().dropoff_count(); ++d) {
    for (int w = 1; w <= net.layout().workstation_count(); ++w) {
      const int out = ticks_to_dropoff(d)[static_cast<std::size_t>(net.workstation_node(w))];
      if (out < kUnreachable) longest = std::max(longest, out);
      for (int a : net.in_arcs(net.dropoff_node(d))) {
        if (net.arcs()[static_cast<std::size_t>(a)].kind != ArcKind::Drop) continue;
        const int back = ticks_to_workstation(w)[static_cast<std::size_t>(net.arcs()[static_cast<std::size_t>(a)].tail)];
        if (back < kUnreachable) longest = std::max(longest, back);
      }
    }
  }
  return longest;
}

}  // namespace rss
