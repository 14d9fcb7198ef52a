#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rss/delay.hpp"

namespace rss {

struct SolverConfig {
  double epsilon_rel = 1e-6;  // tolerance is epsilon_rel * TC of the starting flow
  int max_iter = 200;
  int line_search_iters = 64;
  std::uint64_t seed = 0;  // kept for the config hash; ties are broken by arc index

  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double tc = 0.0;         // after the step
  double tc_linear = 0.0;  // linearized objective at the direction point
  double alpha = 0.0;
  double residual = 0.0;   // conservation residual after the step
};

struct SolveTrace {
  double initial_tc = 0.0;
  std::vector<IterationRecord> iterations;
  bool converged = false;
  bool hit_max_iter = false;
  bool clamped_negative_cost = false;
  bool split_start = false;  // the free-flow start saturated a workstation
};

struct SolveResult {
  LinkFlow flow;
  SolveTrace trace;
};

// Each commodity's whole demand on its cheapest path under `costs`. Arcs
// with infinite cost are unusable. Negative costs are treated as 0 and
// reported through `clamped`.
LinkFlow all_or_nothing(const FlowNetwork& net, std::span<const double> costs, bool* clamped = nullptr);

// Minimizer of a unimodal-ish phi over [a, b] after `iters` golden-section
// reductions (midpoint of the final bracket).
double golden_section(const std::function<double(double)>& phi, double a, double b, int iters);

struct LineSearchResult {
  double alpha = 0.0;
  double tc = 0.0;
};

// Best step from `current` toward `target`; never worse than alpha = 0.
LineSearchResult line_search(const FlowNetwork& net, const LinkFlow& current, const LinkFlow& target,
                             const TimingParams& timing, int iters = 64);

// Throws InfeasibleDemand when total demand exceeds workstation capacity.
SolveResult frank_wolfe(const FlowNetwork& net, const TimingParams& timing, const SolverConfig& config = {});

}  // namespace rss
