#pragma once

// Exhaustive simple-path enumeration, for checking shortest-path results on
// small networks.

#include <functional>
#include <limits>

#include "rss/network.hpp"

namespace oracle {

// Cheapest simple path cost from `from` to `to` over arcs of `dir`.
inline double brute_force_min(const rss::FlowNetwork& net, const std::vector<double>& cost, rss::Direction dir,
                              int from, int to) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> on(static_cast<std::size_t>(net.node_count()), 0);
  std::function<void(int, double)> dfs = [&](int u, double acc) {
    if (u == to) {
      best = std::min(best, acc);
      return;
    }
    on[static_cast<std::size_t>(u)] = 1;
    for (int a : net.out_arcs(u)) {
      const rss::Arc& arc = net.arcs()[static_cast<std::size_t>(a)];
      if (!(dir == rss::Direction::Forward ? arc.forward : arc.backward)) continue;
      if (on[static_cast<std::size_t>(arc.head)]) continue;
      dfs(arc.head, acc + cost[static_cast<std::size_t>(a)]);
    }
    on[static_cast<std::size_t>(u)] = 0;
  };
  dfs(from, 0.0);
  return best;
}

}  // namespace oracle
