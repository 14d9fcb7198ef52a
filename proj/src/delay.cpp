#include "rss/delay.hpp"

#include <algorithm>
#include <cmath>

#include "rss/errors.hpp"

namespace rss {

TimingParams TimingParams::deterministic(double t1, double t2, double t_load, double t_drop) {
  return TimingParams{t1, t2, t_drop, t_drop * t_drop, t_load, t_load * t_load};
}

void TimingParams::validate() const {
  if (!(t1 > 0 && t2 > 0 && drop_mean > 0 && load_mean > 0)) throw ConfigError("timing parameters must be positive");
  // Relative slack for second moments given as mean^2 in decimal.
  if (load_m2 < load_mean * load_mean * (1 - 1e-12)) throw ConfigError("E[T_load^2] must be at least E[T_load]^2");
  if (drop_m2 < drop_mean * drop_mean * (1 - 1e-12)) throw ConfigError("E[T_drop^2] must be at least E[T_drop]^2");
}

double TimingParams::occupancy_bound() const { return std::max(t2 + 2 * t1, drop_mean + 2 * t1); }

std::vector<double> LinkFlow::totals() const {
  std::vector<double> v(fwd.size());
  for (std::size_t a = 0; a < fwd.size(); ++a) v[a] = fwd[a] + bwd[a];
  return v;
}

LinkFlow LinkFlow::toward(const LinkFlow& other, double alpha) const {
  LinkFlow out(size());
  for (std::size_t a = 0; a < fwd.size(); ++a) {
    out.fwd[a] = fwd[a] + alpha * (other.fwd[a] - fwd[a]);
    out.bwd[a] = bwd[a] + alpha * (other.bwd[a] - bwd[a]);
  }
  return out;
}

double conservation_residual(const FlowNetwork& net, const LinkFlow& flow) {
  const double lambda = net.demand().total();
  double worst = 0.0;
  for (int dir = 0; dir < 2; ++dir) {
    const auto& f = dir == 0 ? flow.fwd : flow.bwd;
    std::vector<double> net_out(static_cast<std::size_t>(net.node_count()), 0.0);
    for (int a = 0; a < net.arc_count(); ++a) {
      const Arc& arc = net.arcs()[static_cast<std::size_t>(a)];
      net_out[static_cast<std::size_t>(arc.tail)] += f[static_cast<std::size_t>(a)];
      net_out[static_cast<std::size_t>(arc.head)] -= f[static_cast<std::size_t>(a)];
    }
    const int origin = dir == 0 ? net.source() : net.sink();
    const int dest = dir == 0 ? net.sink() : net.source();
    net_out[static_cast<std::size_t>(origin)] -= lambda;
    net_out[static_cast<std::size_t>(dest)] += lambda;
    for (double r : net_out) worst = std::max(worst, std::abs(r));
    for (int d = 1; d <= net.layout().dropoff_count(); ++d) {
      const int tail = dir == 0 ? net.dropoff_node(d) : net.sink();
      const int head = dir == 0 ? net.sink() : net.dropoff_node(d);
      const int a = net.find_arc(tail, head);
      worst = std::max(worst, std::abs(f[static_cast<std::size_t>(a)] - net.demand().per_dropoff[static_cast<std::size_t>(d - 1)]));
    }
  }
  return worst;
}

namespace {

// Service-time moments of the three cell-usage classes when nothing
// downstream blocks: pass through, turn, drop.
struct ServiceMoments {
  double g1, g2, g3;  // first moments
  double h1, h2, h3;  // second moments
  explicit ServiceMoments(const TimingParams& t)
      : g1(2 * t.t1),
        g2(2 * t.t1 + t.t2),
        g3(2 * t.t1 + t.drop_mean),
        h1(4 * t.t1 * t.t1),
        h2((2 * t.t1 + t.t2) * (2 * t.t1 + t.t2)),
        h3(4 * t.t1 * t.t1 + 4 * t.t1 * t.drop_mean + t.drop_m2) {}
};

struct CellAggregate {
  double in = 0.0;   // arrivals from neighboring cells or a workstation
  double pop = 0.0;  // v_j: arrivals plus empty robots starting here after a drop
  double turn = 0.0;
  double drop = 0.0;
  double m1 = 0.0;  // v_j E[G_j]
  double m2 = 0.0;  // v_j E[G_j^2]
  double eg = 0.0;  // E[G_j]
  std::vector<double> approach;
};

std::vector<CellAggregate> aggregate(const FlowNetwork& net, const std::vector<double>& v, const ServiceMoments& s) {
  std::vector<CellAggregate> agg(static_cast<std::size_t>(net.layout().cell_count()));
  for (int c = 0; c < net.layout().cell_count(); ++c) {
    const CellArcs& ca = net.cell_arcs(c);
    CellAggregate& g = agg[static_cast<std::size_t>(c)];
    g.approach.assign(ca.approaches.size(), 0.0);
    for (std::size_t p = 0; p < ca.approaches.size(); ++p)
      for (int a : ca.approaches[p].arcs) g.approach[p] += v[static_cast<std::size_t>(a)];
    for (double x : g.approach) g.in += x;
    for (int a : ca.turns) g.turn += v[static_cast<std::size_t>(a)];
    for (int a : ca.drops) g.drop += v[static_cast<std::size_t>(a)];
    g.pop = g.in;
    for (int a : ca.returns) g.pop += v[static_cast<std::size_t>(a)];
    // Through flow is the remainder pop - turn - drop; expanded so the moments
    // stay linear in the raw sums.
    g.m1 = g.pop * s.g1 + g.turn * (s.g2 - s.g1) + g.drop * (s.g3 - s.g1);
    g.m2 = g.pop * s.h1 + g.turn * (s.h2 - s.h1) + g.drop * (s.h3 - s.h1);
    g.eg = g.pop > 0 ? g.m1 / g.pop : 0.0;
  }
  return agg;
}

double approach_eg(const Approach& ap, const std::vector<CellAggregate>& agg, const TimingParams& t) {
  return ap.from_cell >= 0 ? agg[static_cast<std::size_t>(ap.from_cell)].eg : t.load_mean;
}

double cell_delay(const FlowNetwork& net, const std::vector<CellAggregate>& agg, int cell, std::size_t approach,
                  const TimingParams& t) {
  const CellAggregate& g = agg[static_cast<std::size_t>(cell)];
  double s = 0.5 * g.m2;
  const auto& aps = net.cell_arcs(cell).approaches;
  if (g.pop > 0) {
    for (std::size_t q = 0; q < aps.size(); ++q) {
      if (q == approach) continue;
      s += 0.5 * g.approach[q] * approach_eg(aps[q], agg, t) * g.eg;
    }
  }
  return s;
}

std::size_t approach_index(const FlowNetwork& net, int arc) {
  const Arc& a = net.arcs()[static_cast<std::size_t>(arc)];
  const auto& aps = net.cell_arcs(net.cell_of(a.head)).approaches;
  for (std::size_t p = 0; p < aps.size(); ++p)
    if (std::find(aps[p].arcs.begin(), aps[p].arcs.end(), arc) != aps[p].arcs.end()) return p;
  return aps.size();
}

double load_flow(const FlowNetwork& net, const std::vector<double>& v, int w) {
  return v[static_cast<std::size_t>(net.find_arc(net.source(), net.workstation_node(w)))];
}

}  // namespace

CellComposition cell_composition(const FlowNetwork& net, const LinkFlow& flow, int cell) {
  const ServiceMoments s(TimingParams{});
  const auto v = flow.totals();
  const auto agg = aggregate(net, v, s);
  const CellAggregate& g = agg[static_cast<std::size_t>(cell)];
  CellComposition out;
  out.turning = g.turn;
  out.dropping = g.drop;
  out.through = std::max(0.0, g.pop - g.turn - g.drop);
  out.total = out.through + out.turning + out.dropping;
  out.per_approach = g.approach;
  return out;
}

double expected_cell_delay(const FlowNetwork& net, const LinkFlow& flow, int arc, const TimingParams& timing) {
  const Arc& a = net.arcs()[static_cast<std::size_t>(arc)];
  if (a.kind != ArcKind::Move && a.kind != ArcKind::StationOut)
    throw ConfigError("expected_cell_delay needs an arrival (move) arc");
  const ServiceMoments s(timing);
  const auto agg = aggregate(net, flow.totals(), s);
  return cell_delay(net, agg, net.cell_of(a.head), approach_index(net, arc), timing);
}

double workstation_delay(double flow, const TimingParams& t, int workstation_id) {
  const double rho = flow * t.load_mean;
  if (rho >= 1.0 - kSaturationEps) throw SaturatedWorkstation(workstation_id, rho);
  return t.load_mean + flow * t.load_m2 / (2.0 * (1.0 - rho));
}

double workstation_delay_derivative(double flow, const TimingParams& t) {
  const double one_minus = 1.0 - flow * t.load_mean;
  return t.load_m2 / (2.0 * one_minus * one_minus);
}

std::vector<double> free_flow_costs(const FlowNetwork& net, const TimingParams& t) {
  std::vector<double> c(static_cast<std::size_t>(net.arc_count()), 0.0);
  for (int a = 0; a < net.arc_count(); ++a) {
    switch (net.arcs()[static_cast<std::size_t>(a)].kind) {
      case ArcKind::Move:
      case ArcKind::StationOut:
      case ArcKind::StationIn: c[static_cast<std::size_t>(a)] = t.t1; break;
      case ArcKind::Turn: c[static_cast<std::size_t>(a)] = t.t2; break;
      case ArcKind::Load: c[static_cast<std::size_t>(a)] = t.load_mean; break;
      case ArcKind::Drop: c[static_cast<std::size_t>(a)] = t.drop_mean; break;
      default: break;
    }
  }
  return c;
}

std::vector<double> arc_costs(const FlowNetwork& net, const LinkFlow& flow, const TimingParams& t) {
  const auto v = flow.totals();
  const ServiceMoments s(t);
  const auto agg = aggregate(net, v, s);
  auto c = free_flow_costs(net, t);
  for (int cell = 0; cell < net.layout().cell_count(); ++cell) {
    const auto& aps = net.cell_arcs(cell).approaches;
    for (std::size_t p = 0; p < aps.size(); ++p) {
      const double delay = cell_delay(net, agg, cell, p, t);
      for (int a : aps[p].arcs) c[static_cast<std::size_t>(a)] += delay;
    }
  }
  for (int w = 1; w <= net.layout().workstation_count(); ++w)
    c[static_cast<std::size_t>(net.find_arc(net.source(), net.workstation_node(w)))] =
        workstation_delay(load_flow(net, v, w), t, w);
  return c;
}

double total_cost(const FlowNetwork& net, const LinkFlow& flow, const TimingParams& t) {
  const auto c = arc_costs(net, flow, t);
  double tc = 0.0;
  for (int a = 0; a < net.arc_count(); ++a) tc += flow.total(a) * c[static_cast<std::size_t>(a)];
  return tc;
}

std::vector<double> cost_gradient(const FlowNetwork& net, const LinkFlow& flow, const TimingParams& t) {
  const auto v = flow.totals();
  const ServiceMoments s(t);
  const auto agg = aggregate(net, v, s);
  const int n_cells = net.layout().cell_count();

  // Adjoints of the per-cell quantities the delay terms are written in.
  std::vector<double> a_in(static_cast<std::size_t>(n_cells), 0.0);
  std::vector<double> a_pop(static_cast<std::size_t>(n_cells), 0.0);
  std::vector<double> a_m1(static_cast<std::size_t>(n_cells), 0.0);
  std::vector<double> a_m2(static_cast<std::size_t>(n_cells), 0.0);
  std::vector<std::vector<double>> a_app(static_cast<std::size_t>(n_cells));

  for (int j = 0; j < n_cells; ++j) {
    const CellAggregate& g = agg[static_cast<std::size_t>(j)];
    const auto& aps = net.cell_arcs(j).approaches;
    a_app[static_cast<std::size_t>(j)].assign(aps.size(), 0.0);
    // D_j = 0.5 in m2 + (m1 / pop) * sum_p A_p * 0.5 * sum_{q != p} A_q EG_q
    a_in[static_cast<std::size_t>(j)] += 0.5 * g.m2;
    a_m2[static_cast<std::size_t>(j)] += 0.5 * g.in;
    if (g.pop <= 0 || aps.size() < 2) continue;
    const double ratio = g.m1 / g.pop;
    double cross = 0.0;  // sum_{p != q} 0.5 A_p A_q EG_q
    for (std::size_t p = 0; p < aps.size(); ++p) {
      for (std::size_t q = 0; q < aps.size(); ++q) {
        if (p == q) continue;
        const double eg_q = approach_eg(aps[q], agg, t);
        cross += 0.5 * g.approach[p] * g.approach[q] * eg_q;
        a_app[static_cast<std::size_t>(j)][p] += ratio * 0.5 * g.approach[q] * eg_q;
        a_app[static_cast<std::size_t>(j)][q] += ratio * 0.5 * g.approach[p] * eg_q;
        const int k = aps[q].from_cell;
        if (k >= 0) {
          const CellAggregate& gk = agg[static_cast<std::size_t>(k)];
          if (gk.pop > 0) {
            const double a_eg = ratio * 0.5 * g.approach[p] * g.approach[q];
            a_m1[static_cast<std::size_t>(k)] += a_eg / gk.pop;
            a_pop[static_cast<std::size_t>(k)] -= a_eg * gk.m1 / (gk.pop * gk.pop);
          }
        }
      }
    }
    a_m1[static_cast<std::size_t>(j)] += cross / g.pop;
    a_pop[static_cast<std::size_t>(j)] -= cross * g.m1 / (g.pop * g.pop);
  }

  std::vector<double> a_turn(static_cast<std::size_t>(n_cells));
  std::vector<double> a_drop(static_cast<std::size_t>(n_cells));
  for (std::size_t j = 0; j < static_cast<std::size_t>(n_cells); ++j) {
    a_pop[j] += a_m1[j] * s.g1 + a_m2[j] * s.h1;
    a_turn[j] = a_m1[j] * (s.g2 - s.g1) + a_m2[j] * (s.h2 - s.h1);
    a_drop[j] = a_m1[j] * (s.g3 - s.g1) + a_m2[j] * (s.h3 - s.h1);
  }

  auto grad = free_flow_costs(net, t);
  for (int j = 0; j < n_cells; ++j) {
    const std::size_t jj = static_cast<std::size_t>(j);
    const CellArcs& ca = net.cell_arcs(j);
    for (std::size_t p = 0; p < ca.approaches.size(); ++p)
      for (int a : ca.approaches[p].arcs) grad[static_cast<std::size_t>(a)] += a_in[jj] + a_pop[jj] + a_app[jj][p];
    for (int a : ca.returns) grad[static_cast<std::size_t>(a)] += a_pop[jj];
    for (int a : ca.turns) grad[static_cast<std::size_t>(a)] += a_turn[jj];
    for (int a : ca.drops) grad[static_cast<std::size_t>(a)] += a_drop[jj];
  }
  for (int w = 1; w <= net.layout().workstation_count(); ++w) {
    const int a = net.find_arc(net.source(), net.workstation_node(w));
    const double x = v[static_cast<std::size_t>(a)];
    grad[static_cast<std::size_t>(a)] = workstation_delay(x, t, w) + x * workstation_delay_derivative(x, t);
  }
  return grad;
}

std::vector<double> approximation_error_bound(const FlowNetwork& net, const LinkFlow& flow, const TimingParams& t,
                                              int robots) {
  const ServiceMoments s(t);
  const auto agg = aggregate(net, flow.totals(), s);
  const double cg = t.occupancy_bound();
  const double scale = static_cast<double>(robots) * robots * cg * cg;
  std::vector<double> bound(static_cast<std::size_t>(net.arc_count()), 0.0);
  for (int j = 0; j < net.layout().cell_count(); ++j) {
    double vmax = 0.0;
    for (int a : net.cell_arcs(j).moves_out) {
      const int next = net.cell_of(net.arcs()[static_cast<std::size_t>(a)].head);
      vmax = std::max(vmax, agg[static_cast<std::size_t>(next)].pop);
    }
    for (const Approach& ap : net.cell_arcs(j).approaches)
      for (int a : ap.arcs) bound[static_cast<std::size_t>(a)] = vmax * scale;
  }
  return bound;
}

}  // namespace rss
