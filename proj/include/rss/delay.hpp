#pragma once

#include <span>
#include <vector>

#include "rss/network.hpp"

namespace rss {

// All times are in time-step units.
struct TimingParams {
  double t1 = 1.0;          // cell traversal
  double t2 = 4.0;          // 90 degree turn
  double drop_mean = 1.0;   // E[T_drop]
  double drop_m2 = 1.0;     // E[T_drop^2]
  double load_mean = 3.0;   // E[T_load]
  double load_m2 = 9.0;     // E[T_load^2]

  // Deterministic loading / dropping.
  static TimingParams deterministic(double t1, double t2, double t_load, double t_drop);
  // Throws ConfigError on non-positive times or second moments below mean^2.
  void validate() const;
  // Worst-case single-robot cell occupancy, max(T2 + 2 T1, T_drop + 2 T1).
  double occupancy_bound() const;
};

inline constexpr double kSaturationEps = 1e-6;

// Flow per arc split by direction class; total arc flow is fwd + bwd.
struct LinkFlow {
  std::vector<double> fwd;
  std::vector<double> bwd;

  LinkFlow() = default;
  explicit LinkFlow(int arc_count)
      : fwd(static_cast<std::size_t>(arc_count), 0.0), bwd(static_cast<std::size_t>(arc_count), 0.0) {}

  int size() const { return static_cast<int>(fwd.size()); }
  double total(int arc) const { return fwd[static_cast<std::size_t>(arc)] + bwd[static_cast<std::size_t>(arc)]; }
  std::vector<double> totals() const;

  // this + alpha (other - this), elementwise.
  LinkFlow toward(const LinkFlow& other, double alpha) const;
};

// Largest violation of flow conservation (node imbalance minus the signed
// demand at Source / Sink / drop-offs), across both direction classes.
double conservation_residual(const FlowNetwork& net, const LinkFlow& flow);

struct CellComposition {
  double through = 0.0;  // v^(1)
  double turning = 0.0;  // v^(2)
  double dropping = 0.0; // v^(3)
  double total = 0.0;    // v_j
  std::vector<double> per_approach;  // aligned with CellArcs::approaches
};

CellComposition cell_composition(const FlowNetwork& net, const LinkFlow& flow, int cell);

// Blocking delay E[S] for a robot taking arrival arc `arc` (a Move or
// StationOut arc) into its head cell.
double expected_cell_delay(const FlowNetwork& net, const LinkFlow& flow, int arc, const TimingParams& timing);

// Pollaczek-Khinchin mean sojourn at a workstation receiving `flow` parcels
// per time step. Throws SaturatedWorkstation near utilization 1.
double workstation_delay(double flow, const TimingParams& timing, int workstation_id = 0);
double workstation_delay_derivative(double flow, const TimingParams& timing);

// Expected traversal cost of each arc at the given flow.
std::vector<double> arc_costs(const FlowNetwork& net, const LinkFlow& flow, const TimingParams& timing);

double total_cost(const FlowNetwork& net, const LinkFlow& flow, const TimingParams& timing);

// dTC/dv per arc (same for both direction classes).
std::vector<double> cost_gradient(const FlowNetwork& net, const LinkFlow& flow, const TimingParams& timing);

// Free-flow arc costs (the gradient at zero flow).
std::vector<double> free_flow_costs(const FlowNetwork& net, const TimingParams& timing);

// Additive upper-bound term on E[S] for each arrival arc from downstream
// cells of the head; zero for every other arc.
std::vector<double> approximation_error_bound(const FlowNetwork& net, const LinkFlow& flow, const TimingParams& timing,
                                              int robots);

}  // namespace rss
