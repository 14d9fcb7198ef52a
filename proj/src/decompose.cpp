#include "rss/decompose.hpp"

#include <algorithm>
#include <map>

#include "rss/errors.hpp"

namespace rss {

int ResidualGraph::add_arc(int u, int v, double f) {
  tail.push_back(u);
  head.push_back(v);
  flow.push_back(f);
  return static_cast<int>(flow.size()) - 1;
}

void ResidualGraph::finalize() {
  influx.assign(static_cast<std::size_t>(node_count), 0.0);
  out.assign(static_cast<std::size_t>(node_count), {});
  for (std::size_t a = 0; a < flow.size(); ++a) {
    influx[static_cast<std::size_t>(tail[a])] += flow[a];
    influx[static_cast<std::size_t>(head[a])] -= flow[a];
    out[static_cast<std::size_t>(tail[a])].push_back(static_cast<int>(a));
  }
  for (double& x : influx)
    if (std::abs(x) <= kFlowFloor) x = 0.0;
}

ResidualGraph residual_graph(const FlowNetwork& net, const LinkFlow& flow, Direction dir) {
  // Arc ids coincide with network arc ids; arcs of the other class carry 0.
  ResidualGraph g;
  g.node_count = net.node_count();
  const auto& f = dir == Direction::Forward ? flow.fwd : flow.bwd;
  for (int a = 0; a < net.arc_count(); ++a) {
    const Arc& arc = net.arcs()[static_cast<std::size_t>(a)];
    const bool usable = dir == Direction::Forward ? arc.forward : arc.backward;
    const double x = usable ? f[static_cast<std::size_t>(a)] : 0.0;
    g.add_arc(arc.tail, arc.head, x > kFlowFloor ? x : 0.0);
  }
  g.finalize();
  return g;
}

Walk follow_path(const ResidualGraph& g, int start, Rng& rng) {
  Walk w;
  std::vector<int> pos(static_cast<std::size_t>(g.node_count), -1);
  int cur = start;
  w.nodes.push_back(cur);
  pos[static_cast<std::size_t>(cur)] = 0;
  const long long max_steps = 64LL * static_cast<long long>(g.flow.size() + 16);
  for (long long step = 0; g.influx[static_cast<std::size_t>(cur)] >= 0.0; ++step) {
    if (step > max_steps) throw StrandedWalk(cur);
    double total = 0.0;
    for (int a : g.out[static_cast<std::size_t>(cur)]) total += g.flow[static_cast<std::size_t>(a)];
    if (total <= 0.0) throw StrandedWalk(cur);
    double pick = uniform01(rng) * total;
    int chosen = -1;
    for (int a : g.out[static_cast<std::size_t>(cur)]) {
      const double x = g.flow[static_cast<std::size_t>(a)];
      if (x <= 0.0) continue;
      chosen = a;
      if (pick < x) break;
      pick -= x;
    }
    const int next = g.head[static_cast<std::size_t>(chosen)];
    const int seen = pos[static_cast<std::size_t>(next)];
    if (seen >= 0) {
      for (std::size_t i = static_cast<std::size_t>(seen) + 1; i < w.nodes.size(); ++i)
        pos[static_cast<std::size_t>(w.nodes[i])] = -1;
      w.nodes.resize(static_cast<std::size_t>(seen) + 1);
      w.arcs.resize(static_cast<std::size_t>(seen));
      ++w.loops_erased;
    } else {
      pos[static_cast<std::size_t>(next)] = static_cast<int>(w.nodes.size());
      w.nodes.push_back(next);
      w.arcs.push_back(chosen);
    }
    cur = next;
  }
  w.terminal = cur;
  return w;
}

namespace {

// Removes whatever circulation remains once every node is balanced.
void cancel_cycles(ResidualGraph& g, PathFlowTable& table) {
  for (std::size_t seed = 0; seed < g.flow.size(); ++seed) {
    while (g.flow[seed] > 0.0) {
      std::vector<int> pos(static_cast<std::size_t>(g.node_count), -1);
      std::vector<int> arcs{static_cast<int>(seed)};
      std::vector<int> nodes{g.tail[seed]};
      pos[static_cast<std::size_t>(g.tail[seed])] = 0;
      int cur = g.head[seed];
      while (pos[static_cast<std::size_t>(cur)] < 0) {
        pos[static_cast<std::size_t>(cur)] = static_cast<int>(nodes.size());
        nodes.push_back(cur);
        int next = -1;
        for (int a : g.out[static_cast<std::size_t>(cur)])
          if (g.flow[static_cast<std::size_t>(a)] > 0.0) {
            next = a;
            break;
          }
        if (next < 0) {
          // Dangling residue below any meaningful size; drop it.
          if (g.flow[seed] < 1e-9) {
            g.flow[seed] = 0.0;
            break;
          }
          throw StrandedWalk(cur);
        }
        arcs.push_back(next);
        cur = g.head[static_cast<std::size_t>(next)];
      }
      if (g.flow[seed] == 0.0) break;
      const auto first = static_cast<std::size_t>(pos[static_cast<std::size_t>(cur)]);
      std::vector<int> cycle(arcs.begin() + static_cast<long>(first), arcs.end());
      double amount = g.flow[static_cast<std::size_t>(cycle.front())];
      for (int a : cycle) amount = std::min(amount, g.flow[static_cast<std::size_t>(a)]);
      for (int a : cycle) {
        double& x = g.flow[static_cast<std::size_t>(a)];
        x = x - amount <= kFlowFloor ? 0.0 : x - amount;
      }
      ++table.cycles_canceled;
      table.canceled_flow += amount;
    }
  }
}

void decompose_direction(const FlowNetwork& net, const LinkFlow& flow, Direction dir, Rng& rng,
                         PathFlowTable& table) {
  ResidualGraph g = residual_graph(net, flow, dir);
  std::map<std::vector<int>, int> known;
  for (int i = 0; i < g.node_count; ++i) {
    double& in_i = g.influx[static_cast<std::size_t>(i)];
    while (in_i > 0.0) {
      Walk w = follow_path(g, i, rng);
      double& in_k = g.influx[static_cast<std::size_t>(w.terminal)];
      double amount = std::min(in_i, -in_k);
      for (int a : w.arcs) amount = std::min(amount, g.flow[static_cast<std::size_t>(a)]);
      for (int a : w.arcs) {
        double& x = g.flow[static_cast<std::size_t>(a)];
        x = x - amount <= kFlowFloor ? 0.0 : x - amount;
      }
      in_i -= amount;
      in_k += amount;
      if (std::abs(in_i) <= kFlowFloor) in_i = 0.0;
      if (std::abs(in_k) <= kFlowFloor) in_k = 0.0;
      ++table.pushes;

      auto [it, fresh] = known.emplace(w.nodes, static_cast<int>(table.entries.size()));
      if (!fresh) {
        table.entries[static_cast<std::size_t>(it->second)].intensity += amount;
        continue;
      }
      PathFlow p;
      p.direction = dir;
      p.intensity = amount;
      p.nodes = std::move(w.nodes);
      const auto n = p.nodes.size();
      const auto& nodes = net.nodes();
      if (n >= 3) {
        const Node& second = nodes[static_cast<std::size_t>(p.nodes[1])];
        const Node& penult = nodes[static_cast<std::size_t>(p.nodes[n - 2])];
        if (dir == Direction::Forward) {
          p.workstation = second.kind == NodeKind::Workstation ? second.id : 0;
          p.dropoff = penult.kind == NodeKind::DropOff ? penult.id : 0;
        } else {
          p.dropoff = second.kind == NodeKind::DropOff ? second.id : 0;
          p.workstation = penult.kind == NodeKind::Workstation ? penult.id : 0;
        }
      }
      table.entries.push_back(std::move(p));
    }
  }
  cancel_cycles(g, table);
}

}  // namespace

std::vector<int> PathFlowTable::select(Direction dir, int dropoff) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].direction == dir && entries[i].dropoff == dropoff) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> PathFlowTable::select(Direction dir, int dropoff, int workstation) const {
  std::vector<int> out;
  for (int i : select(dir, dropoff))
    if (entries[static_cast<std::size_t>(i)].workstation == workstation) out.push_back(i);
  return out;
}

PathFlowTable decompose_flow(const FlowNetwork& net, const LinkFlow& flow, Rng& rng) {
  PathFlowTable table;
  decompose_direction(net, flow, Direction::Forward, rng, table);
  decompose_direction(net, flow, Direction::Backward, rng, table);
  return table;
}

LinkFlow recompose(const FlowNetwork& net, const PathFlowTable& table) {
  LinkFlow f(net.arc_count());
  for (const PathFlow& p : table.entries) {
    auto& v = p.direction == Direction::Forward ? f.fwd : f.bwd;
    for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i)
      v[static_cast<std::size_t>(net.find_arc(p.nodes[i], p.nodes[i + 1]))] += p.intensity;
  }
  return f;
}

std::vector<int> path_cells(const FlowNetwork& net, const PathFlow& path) {
  std::vector<int> cells;
  int prev_node_cell = -2;
  for (int n : path.nodes) {
    const int c = net.cell_of(n);
    if (c >= 0 && c != prev_node_cell) cells.push_back(c);
    prev_node_cell = c;
  }
  return cells;
}

AliasTable::AliasTable(const std::vector<double>& weights) {
  const std::size_t n = weights.size();
  double total = 0.0;
  for (double w : weights) total += w;
  if (n == 0 || !(total > 0.0)) throw ConfigError("alias table needs positive total weight");
  p_.resize(n);
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<int> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    p_[i] = weights[i] / total;
    scaled[i] = p_[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<int>(i));
  }
  while (!small.empty() && !large.empty()) {
    const int s = small.back();
    small.pop_back();
    const int l = large.back();
    prob_[static_cast<std::size_t>(s)] = scaled[static_cast<std::size_t>(s)];
    alias_[static_cast<std::size_t>(s)] = l;
    scaled[static_cast<std::size_t>(l)] -= 1.0 - scaled[static_cast<std::size_t>(s)];
    if (scaled[static_cast<std::size_t>(l)] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (int i : large) prob_[static_cast<std::size_t>(i)] = 1.0;
  for (int i : small) prob_[static_cast<std::size_t>(i)] = 1.0;
}

int AliasTable::sample(Rng& rng) const {
  const auto i = static_cast<std::size_t>(uniform_below(rng, prob_.size()));
  return uniform01(rng) < prob_[i] ? static_cast<int>(i) : alias_[i];
}

namespace {

SplitChoice make_choice(const PathFlowTable& paths, std::vector<int> entries) {
  std::vector<double> w;
  for (int e : entries) w.push_back(paths.entries[static_cast<std::size_t>(e)].intensity);
  SplitChoice c;
  c.alias = AliasTable(w);
  c.entries = std::move(entries);
  return c;
}

}  // namespace

SplitTable build_split_table(const FlowNetwork& net, const PathFlowTable& paths) {
  SplitTable t;
  t.paths_ = &paths;
  const int n_d = net.layout().dropoff_count();
  t.forward_.resize(static_cast<std::size_t>(n_d));
  t.backward_.resize(static_cast<std::size_t>(n_d));
  t.backward_by_cell_.resize(static_cast<std::size_t>(n_d));
  for (int d = 1; d <= n_d; ++d) {
    const double demand = net.demand().per_dropoff[static_cast<std::size_t>(d - 1)];
    auto fwd = paths.select(Direction::Forward, d);
    auto bwd = paths.select(Direction::Backward, d);
    if (demand > 0 && fwd.empty()) throw MissingDirection(d, true);
    if (demand > 0 && bwd.empty()) throw MissingDirection(d, false);
    if (!fwd.empty()) t.forward_[static_cast<std::size_t>(d - 1)] = make_choice(paths, fwd);
    if (bwd.empty()) continue;
    std::map<int, std::vector<int>> by_cell;
    for (int e : bwd) {
      const auto& nodes = paths.entries[static_cast<std::size_t>(e)].nodes;
      if (nodes.size() > 2) by_cell[net.cell_of(nodes[2])].push_back(e);
    }
    for (auto& [cell, list] : by_cell)
      t.backward_by_cell_[static_cast<std::size_t>(d - 1)].emplace_back(cell, make_choice(paths, list));
    t.backward_[static_cast<std::size_t>(d - 1)] = make_choice(paths, std::move(bwd));
  }
  return t;
}

bool SplitTable::covers(Direction dir, int dropoff) const {
  const auto& v = dir == Direction::Forward ? forward_ : backward_;
  return dropoff >= 1 && dropoff <= static_cast<int>(v.size()) && !v[static_cast<std::size_t>(dropoff - 1)].entries.empty();
}

const SplitChoice& SplitTable::choice(Direction dir, int dropoff) const {
  if (!covers(dir, dropoff)) throw MissingDirection(dropoff, dir == Direction::Forward);
  return (dir == Direction::Forward ? forward_ : backward_)[static_cast<std::size_t>(dropoff - 1)];
}

int SplitTable::draw(Direction dir, int dropoff, Rng& rng) const { return choice(dir, dropoff).draw(rng); }

int SplitTable::draw_backward_from(int dropoff, int cell, Rng& rng) const {
  if (!covers(Direction::Backward, dropoff)) throw MissingDirection(dropoff, false);
  for (const auto& [c, choice] : backward_by_cell_[static_cast<std::size_t>(dropoff - 1)])
    if (c == cell) return choice.draw(rng);
  return -1;
}

}  // namespace rss
