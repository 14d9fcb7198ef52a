#pragma once

// Direct evaluation of the cell blocking delay from the categorical
// definition of the occupancy time G, written without the moment algebra the
// library uses.

#include <map>

#include "rss/delay.hpp"

namespace oracle {

struct CellUse {
  double through = 0, turn = 0, drop = 0;
  double total() const { return through + turn + drop; }
};

inline std::map<int, CellUse> cell_uses(const rss::FlowNetwork& net, const rss::LinkFlow& f) {
  std::map<int, CellUse> uses;
  std::map<int, double> population;
  for (int a = 0; a < net.arc_count(); ++a) {
    const rss::Arc& arc = net.arcs()[static_cast<std::size_t>(a)];
    const double v = f.total(a);
    // Empty robots leaving a drop-off are already inside the cell they return through.
    if (arc.kind == rss::ArcKind::Move || arc.kind == rss::ArcKind::StationOut || arc.kind == rss::ArcKind::DropReturn)
      population[net.cell_of(arc.head)] += v;
    if (arc.kind == rss::ArcKind::Turn) uses[net.cell_of(arc.tail)].turn += v;
    if (arc.kind == rss::ArcKind::Drop) uses[net.cell_of(arc.tail)].drop += v;
  }
  for (auto& [cell, in] : population) uses[cell].through = in - uses[cell].turn - uses[cell].drop;
  return uses;
}

inline double mean_g(const CellUse& u, const rss::TimingParams& t) {
  if (u.total() <= 0) return 0;
  const double g[3] = {2 * t.t1, 2 * t.t1 + t.t2, 2 * t.t1 + t.drop_mean};
  return (u.through * g[0] + u.turn * g[1] + u.drop * g[2]) / u.total();
}

inline double second_g(const CellUse& u, const rss::TimingParams& t) {
  if (u.total() <= 0) return 0;
  const double a = 2 * t.t1;
  const double h[3] = {a * a, (a + t.t2) * (a + t.t2), a * a + 2 * a * t.drop_mean + t.drop_m2};
  return (u.through * h[0] + u.turn * h[1] + u.drop * h[2]) / u.total();
}

// E[S] for a robot using arrival arc `arc`.
inline double cell_delay(const rss::FlowNetwork& net, const rss::LinkFlow& f, int arc, const rss::TimingParams& t) {
  auto uses = cell_uses(net, f);
  const rss::Arc& mine = net.arcs()[static_cast<std::size_t>(arc)];
  const int cell = net.cell_of(mine.head);
  const CellUse& u = uses[cell];
  double s = 0.5 * u.total() * second_g(u, t);
  // Competing arrivals from other tails into the same cell.
  std::map<int, double> other;  // tail cell (or -station id) -> flow
  for (int a = 0; a < net.arc_count(); ++a) {
    const rss::Arc& x = net.arcs()[static_cast<std::size_t>(a)];
    if (x.kind != rss::ArcKind::Move && x.kind != rss::ArcKind::StationOut) continue;
    if (net.cell_of(x.head) != cell) continue;
    auto key = [&](const rss::Arc& y) {
      return y.kind == rss::ArcKind::Move ? net.cell_of(y.tail) : -net.nodes()[static_cast<std::size_t>(y.tail)].id;
    };
    if (key(x) == key(mine)) continue;
    other[key(x)] += f.total(a);
  }
  for (auto [k, v] : other) {
    const double eg_k = k >= 0 ? mean_g(uses[k], t) : t.load_mean;
    s += 0.5 * v * eg_k * mean_g(u, t);
  }
  return s;
}

}  // namespace oracle
