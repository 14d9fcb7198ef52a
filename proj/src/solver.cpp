#include "rss/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "rss/errors.hpp"

namespace rss {

void SolverConfig::validate() const {
  if (!(epsilon_rel > 0)) throw ConfigError("solver epsilon must be positive");
  if (max_iter < 1) throw ConfigError("solver max_iter must be at least 1");
  if (line_search_iters < 1) throw ConfigError("line search iterations must be at least 1");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Tree {
  std::vector<double> dist;
  std::vector<int> pred;  // arc used to settle the node
};

// Dijkstra over arcs of one direction class. With reverse = true distances are
// to `root` along arc direction and pred holds the first arc of the path.
Tree dijkstra(const FlowNetwork& net, const std::vector<double>& cost, Direction dir, int root, bool reverse) {
  const auto n = static_cast<std::size_t>(net.node_count());
  Tree t{std::vector<double>(n, kInf), std::vector<int>(n, -1)};
  std::vector<char> done(n, 0);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  t.dist[static_cast<std::size_t>(root)] = 0.0;
  heap.emplace(0.0, root);
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (done[static_cast<std::size_t>(u)]) continue;
    done[static_cast<std::size_t>(u)] = 1;
    for (int a : reverse ? net.in_arcs(u) : net.out_arcs(u)) {
      const Arc& arc = net.arcs()[static_cast<std::size_t>(a)];
      if (!(dir == Direction::Forward ? arc.forward : arc.backward)) continue;
      const double c = cost[static_cast<std::size_t>(a)];
      if (c == kInf) continue;
      const int v = reverse ? arc.tail : arc.head;
      auto vi = static_cast<std::size_t>(v);
      if (done[vi]) continue;
      const double nd = d + c;
      if (nd < t.dist[vi] || (nd == t.dist[vi] && a < t.pred[vi])) {
        t.dist[vi] = nd;
        t.pred[vi] = a;
        heap.emplace(nd, v);
      }
    }
  }
  return t;
}

double total_load(const FlowNetwork& net, const LinkFlow& f, int w) {
  return f.fwd[static_cast<std::size_t>(net.find_arc(net.source(), net.workstation_node(w)))];
}

// Largest alpha keeping every workstation strictly below saturation.
double max_feasible_alpha(const FlowNetwork& net, const LinkFlow& cur, const LinkFlow& target, const TimingParams& t) {
  double alpha = 1.0;
  const double cap = (1.0 - kSaturationEps) / t.load_mean;
  for (int w = 1; w <= net.layout().workstation_count(); ++w) {
    const double l0 = total_load(net, cur, w);
    const double l1 = total_load(net, target, w);
    if (l1 < cap) continue;
    alpha = std::min(alpha, (cap - l0) / (l1 - l0) * (1.0 - 1e-9));
  }
  return std::max(alpha, 0.0);
}

LinkFlow restricted_aon(const FlowNetwork& net, const std::vector<double>& costs, int w, bool* clamped) {
  std::vector<double> c = costs;
  for (int k = 1; k <= net.layout().workstation_count(); ++k) {
    if (k == w) continue;
    c[static_cast<std::size_t>(net.find_arc(net.source(), net.workstation_node(k)))] = kInf;
    c[static_cast<std::size_t>(net.find_arc(net.workstation_node(k), net.source()))] = kInf;
  }
  return all_or_nothing(net, c, clamped);
}

}  // namespace

LinkFlow all_or_nothing(const FlowNetwork& net, std::span<const double> costs, bool* clamped) {
  std::vector<double> c(costs.begin(), costs.end());
  for (double& x : c) {
    if (x < 0) {
      if (clamped) *clamped = true;
      x = 0;
    }
  }
  LinkFlow flow(net.arc_count());
  const int n_d = net.layout().dropoff_count();
  const Tree fwd = dijkstra(net, c, Direction::Forward, net.source(), false);
  const Tree bwd = dijkstra(net, c, Direction::Backward, net.source(), true);
  for (int k = 1; k <= n_d; ++k) {
    const double d = net.demand().per_dropoff[static_cast<std::size_t>(k - 1)];
    if (d <= 0) continue;
    const int dk = net.dropoff_node(k);
    if (fwd.dist[static_cast<std::size_t>(dk)] == kInf) throw DisconnectedCommodity(true, k);
    if (bwd.dist[static_cast<std::size_t>(dk)] == kInf) throw DisconnectedCommodity(false, k);
    flow.fwd[static_cast<std::size_t>(net.find_arc(dk, net.sink()))] += d;
    for (int v = dk; v != net.source();) {
      const int a = fwd.pred[static_cast<std::size_t>(v)];
      flow.fwd[static_cast<std::size_t>(a)] += d;
      v = net.arcs()[static_cast<std::size_t>(a)].tail;
    }
    flow.bwd[static_cast<std::size_t>(net.find_arc(net.sink(), dk))] += d;
    for (int v = dk; v != net.source();) {
      const int a = bwd.pred[static_cast<std::size_t>(v)];
      flow.bwd[static_cast<std::size_t>(a)] += d;
      v = net.arcs()[static_cast<std::size_t>(a)].head;
    }
  }
  return flow;
}

double golden_section(const std::function<double(double)>& phi, double a, double b, int iters) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - r * (b - a);
  double x2 = a + r * (b - a);
  double f1 = phi(x1);
  double f2 = phi(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = phi(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = phi(x2);
    }
  }
  return 0.5 * (a + b);
}

LineSearchResult line_search(const FlowNetwork& net, const LinkFlow& current, const LinkFlow& target,
                             const TimingParams& timing, int iters) {
  auto phi = [&](double alpha) { return total_cost(net, current.toward(target, alpha), timing); };
  LineSearchResult best{0.0, phi(0.0)};
  const double alpha_max = max_feasible_alpha(net, current, target, timing);
  if (alpha_max <= 0.0) return best;
  const double inner = golden_section(phi, 0.0, alpha_max, iters);
  for (double alpha : {inner, alpha_max}) {
    const double tc = phi(alpha);
    if (tc < best.tc) best = {alpha, tc};
  }
  return best;
}

SolveResult frank_wolfe(const FlowNetwork& net, const TimingParams& timing, const SolverConfig& config) {
  config.validate();
  timing.validate();
  const int n_w = net.layout().workstation_count();
  const double lambda = net.demand().total();
  if (lambda * timing.load_mean >= n_w * (1.0 - kSaturationEps))
    throw InfeasibleDemand("demand " + std::to_string(lambda) + " needs utilization " +
                           std::to_string(lambda * timing.load_mean) + " across " + std::to_string(n_w) +
                           " workstations");

  SolveResult out;
  SolveTrace& trace = out.trace;
  const auto free = free_flow_costs(net, timing);
  LinkFlow f = all_or_nothing(net, free, &trace.clamped_negative_cost);
  if (lambda <= 0.0) {
    trace.iterations.push_back({1, 0.0, 0.0, 0.0, conservation_residual(net, f)});
    trace.converged = true;
    out.flow = std::move(f);
    return out;
  }
  if (max_feasible_alpha(net, LinkFlow(net.arc_count()), f, timing) < 1.0) {
    // Spread the start evenly over workstations.
    trace.split_start = true;
    LinkFlow mix(net.arc_count());
    for (int w = 1; w <= n_w; ++w) {
      LinkFlow part = restricted_aon(net, free, w, &trace.clamped_negative_cost);
      for (int a = 0; a < net.arc_count(); ++a) {
        mix.fwd[static_cast<std::size_t>(a)] += part.fwd[static_cast<std::size_t>(a)] / n_w;
        mix.bwd[static_cast<std::size_t>(a)] += part.bwd[static_cast<std::size_t>(a)] / n_w;
      }
    }
    f = std::move(mix);
  }

  double tc = total_cost(net, f, timing);
  trace.initial_tc = tc;
  const double eps = config.epsilon_rel * tc;
  double prev_linear = std::numeric_limits<double>::quiet_NaN();
  for (int iter = 1; iter <= config.max_iter; ++iter) {
    const auto grad = cost_gradient(net, f, timing);
    LinkFlow y = all_or_nothing(net, grad, &trace.clamped_negative_cost);
    double slope = 0.0;
    for (int a = 0; a < net.arc_count(); ++a)
      slope += grad[static_cast<std::size_t>(a)] * (y.total(a) - f.total(a));
    const double linear = tc + slope;
    const LineSearchResult step = line_search(net, f, y, timing, config.line_search_iters);
    if (step.alpha > 0.0) f = f.toward(y, step.alpha);
    tc = step.tc;
    trace.iterations.push_back({iter, tc, linear, step.alpha, conservation_residual(net, f)});
    // A vanishing duality gap means f already solves its own linearization.
    if (-slope <= eps || (!std::isnan(prev_linear) && std::abs(linear - prev_linear) < eps)) {
      trace.converged = true;
      break;
    }
    prev_linear = linear;
  }
  trace.hit_max_iter = !trace.converged;
  out.flow = std::move(f);
  return out;
}

}  // namespace rss
