#pragma once

#include <vector>

#include "rss/delay.hpp"
#include "rss/random.hpp"

namespace rss {

inline constexpr double kFlowFloor = 1e-12;

// Single-commodity residual graph used by the decomposition walk. Influx of a
// node is outflow minus inflow; sources are positive, destinations negative.
struct ResidualGraph {
  int node_count = 0;
  std::vector<int> tail;
  std::vector<int> head;
  std::vector<double> flow;
  std::vector<double> influx;
  std::vector<std::vector<int>> out;

  int add_arc(int u, int v, double f);
  void finalize();  // computes influx and adjacency from the arc list
};

ResidualGraph residual_graph(const FlowNetwork& net, const LinkFlow& flow, Direction dir);

struct Walk {
  std::vector<int> nodes;
  std::vector<int> arcs;  // residual-graph arc ids, one fewer than nodes
  int terminal = -1;
  int loops_erased = 0;
};

// Flow-weighted random walk from `start` until a node with negative influx.
// Loops are erased as they close so the returned path is simple.
Walk follow_path(const ResidualGraph& g, int start, Rng& rng);

struct PathFlow {
  Direction direction = Direction::Forward;
  int dropoff = 0;
  int workstation = 0;
  double intensity = 0.0;
  std::vector<int> nodes;  // network node ids, Source/Sink endpoints included
};

struct PathFlowTable {
  std::vector<PathFlow> entries;
  int pushes = 0;
  int cycles_canceled = 0;
  double canceled_flow = 0.0;  // total flow removed by cycle cancellation

  std::vector<int> select(Direction dir, int dropoff) const;
  std::vector<int> select(Direction dir, int dropoff, int workstation) const;
};

PathFlowTable decompose_flow(const FlowNetwork& net, const LinkFlow& flow, Rng& rng);

// Sum of path intensities on every arc.
LinkFlow recompose(const FlowNetwork& net, const PathFlowTable& table);

// Cell indices visited by a path, in order (one entry per cell visit).
std::vector<int> path_cells(const FlowNetwork& net, const PathFlow& path);

// Vose alias table over nonnegative weights.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(const std::vector<double>& weights);
  int sample(Rng& rng) const;
  int size() const { return static_cast<int>(prob_.size()); }
  const std::vector<double>& probabilities() const { return p_; }

 private:
  std::vector<double> prob_;
  std::vector<int> alias_;
  std::vector<double> p_;  // normalized input, for inspection
};

struct SplitChoice {
  std::vector<int> entries;  // indexes into PathFlowTable::entries
  AliasTable alias;
  int draw(Rng& rng) const { return entries[static_cast<std::size_t>(alias.sample(rng))]; }
};

class SplitTable {
 public:
  const PathFlowTable& paths() const { return *paths_; }
  // Entry index for a parcel bound for `dropoff`, or an empty robot leaving it.
  int draw(Direction dir, int dropoff, Rng& rng) const;
  // Backward entry whose first cell is `cell`, or -1 when no return path
  // starts there.
  int draw_backward_from(int dropoff, int cell, Rng& rng) const;
  const SplitChoice& choice(Direction dir, int dropoff) const;
  bool covers(Direction dir, int dropoff) const;

 private:
  friend SplitTable build_split_table(const FlowNetwork& net, const PathFlowTable& paths);
  const PathFlowTable* paths_ = nullptr;
  std::vector<SplitChoice> forward_;   // by dropoff - 1
  std::vector<SplitChoice> backward_;  // by dropoff - 1
  std::vector<std::vector<std::pair<int, SplitChoice>>> backward_by_cell_;
};

// The table keeps a pointer to `paths`, which must outlive it. Throws
// MissingDirection when a drop-off with positive demand lacks paths.
SplitTable build_split_table(const FlowNetwork& net, const PathFlowTable& paths);

}  // namespace rss
