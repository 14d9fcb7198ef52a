#include "rss/network.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "rss/errors.hpp"

namespace rss {

const char* arc_kind_name(ArcKind kind) {
  switch (kind) {
    case ArcKind::Move: return "move";
    case ArcKind::Turn: return "turn";
    case ArcKind::Load: return "load";
    case ArcKind::Sorter: return "sorter";
    case ArcKind::StationIn: return "station_in";
    case ArcKind::StationOut: return "station_out";
    case ArcKind::Drop: return "drop";
    case ArcKind::DropReturn: return "drop_return";
    case ArcKind::Exit: return "exit";
  }
  return "?";
}

double Demand::total() const {
  double s = 0.0;
  for (double d : per_dropoff) s += d;
  return s;
}

Demand Demand::uniform(int n_dropoffs, double lambda) {
  if (n_dropoffs <= 0) throw InvalidDemand("uniform demand needs at least one drop-off");
  if (!(lambda >= 0.0)) throw InvalidDemand("lambda must be nonnegative");
  return Demand{std::vector<double>(static_cast<std::size_t>(n_dropoffs), lambda / n_dropoffs)};
}

Demand parse_demand_csv(std::string_view text, int n_dropoffs) {
  Demand demand{std::vector<double>(static_cast<std::size_t>(n_dropoffs), -1.0)};
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.rfind("dropoff_id", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw SyntaxError(line_no, 1, "expected 'dropoff_id,demand'");
    int id = 0;
    double d = 0.0;
    try {
      std::size_t used = 0;
      id = std::stoi(line.substr(0, comma), &used);
      d = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw SyntaxError(line_no, 1, "expected 'dropoff_id,demand'");
    }
    if (id < 1 || id > n_dropoffs) throw InvalidDemand("unknown drop-off id " + std::to_string(id));
    if (!(d >= 0.0)) throw InvalidDemand("negative demand for drop-off " + std::to_string(id));
    if (demand.per_dropoff[static_cast<std::size_t>(id - 1)] >= 0.0)
      throw InvalidDemand("duplicate demand row for drop-off " + std::to_string(id));
    demand.per_dropoff[static_cast<std::size_t>(id - 1)] = d;
  }
  for (std::size_t k = 0; k < demand.per_dropoff.size(); ++k)
    if (demand.per_dropoff[k] < 0.0) throw InvalidDemand("no demand row for drop-off " + std::to_string(k + 1));
  return demand;
}

Demand load_demand_file(const std::string& path, int n_dropoffs) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open demand file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_demand_csv(ss.str(), n_dropoffs);
}

int FlowNetwork::find_arc(int tail, int head) const {
  for (int a : out_arcs(tail))
    if (arcs_[static_cast<std::size_t>(a)].head == head) return a;
  return -1;
}

std::string FlowNetwork::node_label(int node) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  switch (n.kind) {
    case NodeKind::Source: return "S";
    case NodeKind::Sink: return "T";
    case NodeKind::Workstation: return "W" + std::to_string(n.id);
    case NodeKind::DropOff: return "D" + std::to_string(n.id);
    case NodeKind::CellHeading: {
      const Coord p = layout_.coord(n.cell);
      return "C" + std::to_string(p.row) + "_" + std::to_string(p.col) + heading_char(n.heading);
    }
  }
  return "?";
}

std::vector<bool> reachable(const FlowNetwork& net, int from, Direction direction) {
  std::vector<bool> seen(static_cast<std::size_t>(net.node_count()), false);
  std::deque<int> queue{from};
  seen[static_cast<std::size_t>(from)] = true;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int a : net.out_arcs(u)) {
      const Arc& arc = net.arcs()[static_cast<std::size_t>(a)];
      if (direction == Direction::Forward ? !arc.forward : !arc.backward) continue;
      if (!seen[static_cast<std::size_t>(arc.head)]) {
        seen[static_cast<std::size_t>(arc.head)] = true;
        queue.push_back(arc.head);
      }
    }
  }
  return seen;
}

FlowNetwork build_flow_network(const Layout& layout, const Demand& demand) {
  if (static_cast<int>(demand.per_dropoff.size()) != layout.dropoff_count())
    throw InvalidDemand("demand lists " + std::to_string(demand.per_dropoff.size()) + " drop-offs, layout has " +
                        std::to_string(layout.dropoff_count()));
  for (double d : demand.per_dropoff)
    if (!(d >= 0.0)) throw InvalidDemand("demand must be nonnegative");

  FlowNetwork net;
  net.layout_ = layout;
  net.demand_ = demand;

  const int n_w = layout.workstation_count();
  const int n_d = layout.dropoff_count();
  net.nodes_.push_back({NodeKind::Source, 0, -1, Heading::N});
  net.nodes_.push_back({NodeKind::Sink, 0, -1, Heading::N});
  for (int w = 1; w <= n_w; ++w) net.nodes_.push_back({NodeKind::Workstation, w, layout.workstation_cell(w), Heading::N});
  for (int d = 1; d <= n_d; ++d) net.nodes_.push_back({NodeKind::DropOff, d, layout.dropoff_cell(d), Heading::N});
  // Station nodes carry their grid cell for labeling only; cell_of() must
  // return -1 for them, so reset after recording.
  for (std::size_t i = 2; i < net.nodes_.size(); ++i) net.nodes_[i].cell = -1;

  net.cell_nodes_.assign(static_cast<std::size_t>(layout.cell_count() * 4), -1);
  for (int c = 0; c < layout.cell_count(); ++c) {
    const CellSpec& spec = layout.at(c);
    if (spec.kind != CellKind::Ordinary) continue;
    for (Heading h : kHeadings) {
      if (!spec.headings.contains(h)) continue;
      net.cell_nodes_[static_cast<std::size_t>(c * 4 + static_cast<int>(h))] = static_cast<int>(net.nodes_.size());
      net.nodes_.push_back({NodeKind::CellHeading, 0, c, h});
    }
  }

  std::vector<Arc> arcs;
  auto add = [&](int tail, int head, ArcKind kind) {
    Arc a{tail, head, kind, false, false};
    switch (kind) {
      case ArcKind::Move:
      case ArcKind::Turn: a.forward = a.backward = true; break;
      case ArcKind::Load:
      case ArcKind::StationOut:
      case ArcKind::Drop: a.forward = true; break;
      case ArcKind::Sorter:
      case ArcKind::StationIn:
      case ArcKind::DropReturn: a.backward = true; break;
      case ArcKind::Exit: (head == 1 ? a.forward : a.backward) = true; break;
    }
    arcs.push_back(a);
  };

  for (int w = 1; w <= n_w; ++w) {
    add(net.source(), net.workstation_node(w), ArcKind::Load);
    add(net.workstation_node(w), net.source(), ArcKind::Sorter);
  }
  for (int d = 1; d <= n_d; ++d) {
    add(net.dropoff_node(d), net.sink(), ArcKind::Exit);
    add(net.sink(), net.dropoff_node(d), ArcKind::Exit);
  }
  for (int c = 0; c < layout.cell_count(); ++c) {
    const CellSpec& spec = layout.at(c);
    if (spec.kind != CellKind::Ordinary) continue;
    for (Heading h : kHeadings) {
      const int u = net.cell_node(c, h);
      if (u < 0) continue;
      for (Heading h2 : kHeadings) {
        const int v = net.cell_node(c, h2);
        if (v >= 0 && h2 != h && h2 != opposite(h)) add(u, v, ArcKind::Turn);
      }
      const int nb = layout.neighbor(c, h);
      if (nb < 0) continue;
      const CellSpec& next = layout.at(nb);
      if (next.kind == CellKind::Ordinary && next.headings.contains(h)) add(u, net.cell_node(nb, h), ArcKind::Move);
      if (next.kind == CellKind::Workstation) add(u, net.workstation_node(next.id), ArcKind::StationIn);
    }
    for (Heading h : kHeadings) {
      const int nb = layout.neighbor(c, h);
      if (nb < 0) continue;
      const CellSpec& next = layout.at(nb);
      if (next.kind != CellKind::DropOff) continue;
      for (Heading own : kHeadings) {
        const int u = net.cell_node(c, own);
        if (u < 0) continue;
        add(u, net.dropoff_node(next.id), ArcKind::Drop);
        add(net.dropoff_node(next.id), u, ArcKind::DropReturn);
      }
    }
  }
  for (int w = 1; w <= n_w; ++w) {
    const int cell = layout.workstation_cell(w);
    for (Heading h : kHeadings) {
      const int nb = layout.neighbor(cell, h);
      if (nb < 0 || layout.at(nb).kind != CellKind::Ordinary || !layout.at(nb).headings.contains(h)) continue;
      add(net.workstation_node(w), net.cell_node(nb, h), ArcKind::StationOut);
    }
  }

  std::stable_sort(arcs.begin(), arcs.end(),
                   [](const Arc& a, const Arc& b) { return a.tail != b.tail ? a.tail < b.tail : a.head < b.head; });
  net.arcs_ = std::move(arcs);

  net.out_.assign(net.nodes_.size(), {});
  net.in_.assign(net.nodes_.size(), {});
  for (int a = 0; a < net.arc_count(); ++a) {
    net.out_[static_cast<std::size_t>(net.arcs_[static_cast<std::size_t>(a)].tail)].push_back(a);
    net.in_[static_cast<std::size_t>(net.arcs_[static_cast<std::size_t>(a)].head)].push_back(a);
  }

  net.cell_arcs_.assign(static_cast<std::size_t>(layout.cell_count()), {});
  for (int a = 0; a < net.arc_count(); ++a) {
    const Arc& arc = net.arcs_[static_cast<std::size_t>(a)];
    const Node& tail = net.nodes_[static_cast<std::size_t>(arc.tail)];
    const Node& head = net.nodes_[static_cast<std::size_t>(arc.head)];
    switch (arc.kind) {
      case ArcKind::Turn: net.cell_arcs_[static_cast<std::size_t>(tail.cell)].turns.push_back(a); break;
      case ArcKind::Drop: net.cell_arcs_[static_cast<std::size_t>(tail.cell)].drops.push_back(a); break;
      case ArcKind::DropReturn: net.cell_arcs_[static_cast<std::size_t>(head.cell)].returns.push_back(a); break;
      case ArcKind::Move:
      case ArcKind::StationOut: {
        if (arc.kind == ArcKind::Move) net.cell_arcs_[static_cast<std::size_t>(tail.cell)].moves_out.push_back(a);
        auto& approaches = net.cell_arcs_[static_cast<std::size_t>(head.cell)].approaches;
        const int from_cell = arc.kind == ArcKind::Move ? tail.cell : -1;
        const int from_station = arc.kind == ArcKind::Move ? 0 : tail.id;
        auto it = std::find_if(approaches.begin(), approaches.end(), [&](const Approach& ap) {
          return ap.from_cell == from_cell && ap.from_station == from_station;
        });
        if (it == approaches.end()) {
          approaches.push_back({from_cell, from_station, {}});
          it = approaches.end() - 1;
        }
        it->arcs.push_back(a);
        break;
      }
      default: break;
    }
  }

  for (int d = 1; d <= n_d; ++d) {
    const double dem = demand.per_dropoff[static_cast<std::size_t>(d - 1)];
    net.commodities_.push_back({Direction::Forward, d, dem});
    net.commodities_.push_back({Direction::Backward, d, dem});
  }

  const auto fwd = reachable(net, net.source(), Direction::Forward);
  for (int d = 1; d <= n_d; ++d) {
    if (!fwd[static_cast<std::size_t>(net.dropoff_node(d))]) throw DisconnectedCommodity(true, d);
    const auto bwd = reachable(net, net.dropoff_node(d), Direction::Backward);
    if (!bwd[static_cast<std::size_t>(net.source())]) throw DisconnectedCommodity(false, d);
  }
  return net;
}

}  // namespace rss
