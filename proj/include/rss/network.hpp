#pragma once

#include <string>
#include <vector>

#include "rss/layout.hpp"

namespace rss {

enum class NodeKind : std::uint8_t { Source, Sink, Workstation, DropOff, CellHeading };

struct Node {
  NodeKind kind = NodeKind::Source;
  int id = 0;     // station id for Workstation / DropOff
  int cell = -1;  // cell index for CellHeading
  Heading heading = Heading::N;
};

// Move:       cell-heading -> next cell, same heading
// Turn:       in-cell 90 degree turn between two heading nodes
// Load:       Source -> Workstation (parcel assignment, M/G/1 loading)
// Sorter:     Workstation -> Source (robot returns into the pool)
// StationIn:  cell-heading -> Workstation (robot enters the queue)
// StationOut: Workstation -> cell-heading (loaded robot leaves)
// Drop:       cell-heading -> DropOff (parcel released)
// DropReturn: DropOff -> cell-heading (empty robot starts its return)
// Exit:       DropOff -> Sink (forward) or Sink -> DropOff (backward)
enum class ArcKind : std::uint8_t { Move, Turn, Load, Sorter, StationIn, StationOut, Drop, DropReturn, Exit };

const char* arc_kind_name(ArcKind kind);

struct Arc {
  int tail = 0;
  int head = 0;
  ArcKind kind = ArcKind::Move;
  bool forward = false;   // usable by parcel-carrying flow
  bool backward = false;  // usable by empty-robot flow
};

enum class Direction : std::uint8_t { Forward, Backward };

struct Commodity {
  Direction direction = Direction::Forward;
  int dropoff = 0;
  double demand = 0.0;
};

// Per-drop-off parcel demand, indexed by drop-off id - 1.
struct Demand {
  std::vector<double> per_dropoff;
  double total() const;
  static Demand uniform(int n_dropoffs, double lambda);
};

Demand parse_demand_csv(std::string_view text, int n_dropoffs);
Demand load_demand_file(const std::string& path, int n_dropoffs);

// Robots entering cell j from one neighboring cell (or from a workstation).
struct Approach {
  int from_cell = -1;     // -1 when the approach is a workstation
  int from_station = 0;   // workstation id when from_cell == -1
  std::vector<int> arcs;  // arrival arcs from this approach
};

struct CellArcs {
  std::vector<Approach> approaches;  // at most two for a valid layout
  std::vector<int> turns;
  std::vector<int> drops;
  std::vector<int> returns;    // DropReturn arcs: empty robots starting here after a drop
  std::vector<int> moves_out;  // Move arcs leaving the cell
};

class FlowNetwork {
 public:
  const Layout& layout() const { return layout_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<Commodity>& commodities() const { return commodities_; }
  const Demand& demand() const { return demand_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int arc_count() const { return static_cast<int>(arcs_.size()); }

  int source() const { return 0; }
  int sink() const { return 1; }
  int workstation_node(int id) const { return 2 + id - 1; }
  int dropoff_node(int id) const { return 2 + layout_.workstation_count() + id - 1; }
  // Node for (cell, heading) or -1 when the cell does not allow that heading.
  int cell_node(int cell, Heading h) const { return cell_nodes_[static_cast<std::size_t>(cell * 4 + static_cast<int>(h))]; }

  const std::vector<int>& out_arcs(int node) const { return out_[static_cast<std::size_t>(node)]; }
  const std::vector<int>& in_arcs(int node) const { return in_[static_cast<std::size_t>(node)]; }
  const CellArcs& cell_arcs(int cell) const { return cell_arcs_[static_cast<std::size_t>(cell)]; }
  // Arc index for (tail, head), or -1.
  int find_arc(int tail, int head) const;

  // Cell index of a node (-1 for non-cell nodes).
  int cell_of(int node) const { return nodes_[static_cast<std::size_t>(node)].cell; }
  std::string node_label(int node) const;

 private:
  friend FlowNetwork build_flow_network(const Layout& layout, const Demand& demand);

  Layout layout_;
  Demand demand_;
  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::vector<Commodity> commodities_;
  std::vector<int> cell_nodes_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
  std::vector<CellArcs> cell_arcs_;
};

// Throws InvalidDemand when demand does not cover the layout's drop-offs and
// DisconnectedCommodity when some commodity has no route.
FlowNetwork build_flow_network(const Layout& layout, const Demand& demand);

// Whether a node is reachable from `from` using only arcs of `direction`.
std::vector<bool> reachable(const FlowNetwork& net, int from, Direction direction);

}  // namespace rss
