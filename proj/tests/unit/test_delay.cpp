#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles/delay_oracle.hpp"
#include "rss/errors.hpp"

using namespace rss;

namespace {

struct RingPath {
  FlowNetwork net = fixtures::ring_network(0.1);
  LinkFlow flow{net.arc_count()};
  int node(int r, int c, Heading h) const { return net.cell_node(net.layout().index(r, c), h); }
  void fwd(int u, int v, double x) { flow.fwd[static_cast<std::size_t>(net.find_arc(u, v))] += x; }
  void bwd(int u, int v, double x) { flow.bwd[static_cast<std::size_t>(net.find_arc(u, v))] += x; }

  // Forward along the top row, return along the bottom row.
  RingPath() {
    const int S = net.source(), T = net.sink(), W = net.workstation_node(1), D = net.dropoff_node(1);
    fwd(S, W, 0.1);
    fwd(W, node(0, 0, Heading::N), 0.1);
    fwd(node(0, 0, Heading::N), node(0, 0, Heading::E), 0.1);
    fwd(node(0, 0, Heading::E), node(0, 1, Heading::E), 0.1);
    fwd(node(0, 1, Heading::E), node(0, 2, Heading::E), 0.1);
    fwd(node(0, 2, Heading::E), D, 0.1);
    fwd(D, T, 0.1);
    bwd(T, D, 0.1);
    bwd(D, node(2, 2, Heading::W), 0.1);
    bwd(node(2, 2, Heading::W), node(2, 1, Heading::W), 0.1);
    bwd(node(2, 1, Heading::W), node(2, 0, Heading::W), 0.1);
    bwd(node(2, 0, Heading::W), node(2, 0, Heading::N), 0.1);
    bwd(node(2, 0, Heading::N), W, 0.1);
    bwd(W, S, 0.1);
  }
};

double max_rel_gradient_error(const FlowNetwork& net, const LinkFlow& f, const TimingParams& t) {
  const auto g = cost_gradient(net, f, t);
  const double h = 1e-6;
  double worst = 0;
  for (int a = 0; a < net.arc_count(); ++a) {
    LinkFlow up = f, down = f;
    up.fwd[static_cast<std::size_t>(a)] += h;
    down.fwd[static_cast<std::size_t>(a)] -= h;
    const double fd = (total_cost(net, up, t) - total_cost(net, down, t)) / (2 * h);
    const double scale = std::max({std::abs(fd), std::abs(g[static_cast<std::size_t>(a)]), 1.0});
    worst = std::max(worst, std::abs(fd - g[static_cast<std::size_t>(a)]) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("zero flow costs nothing and the gradient is the free-flow cost") {
  FlowNetwork net = fixtures::standard_network(7, 8, 1, 2, 3, 0.05);
  TimingParams t;
  LinkFlow zero(net.arc_count());
  CHECK(total_cost(net, zero, t) == 0.0);
  auto g = cost_gradient(net, zero, t);
  auto ff = free_flow_costs(net, t);
  for (int a = 0; a < net.arc_count(); ++a) CHECK(g[static_cast<std::size_t>(a)] == doctest::Approx(ff[static_cast<std::size_t>(a)]));
}

TEST_CASE("ring total cost matches a hand evaluation") {
  RingPath p;
  TimingParams t;
  CHECK(conservation_residual(p.net, p.flow) < 1e-15);
  // Per-arc costs, summed by hand:
  //   load 3 + 0.9/1.4; leave W1 into (0,0) 1 + 1.8; turn 4; (0,1) 1.2; (0,2) 1.45; drop 1
  //   (2,1) 1.2; (2,0) 1 + 1.8; turn 4; enter W1 1
  const double per_unit = 3.0 + 0.9 / 1.4 + 2.8 + 4 + 1.2 + 1.45 + 1 + 1.2 + 2.8 + 4 + 1;
  CHECK(total_cost(p.net, p.flow, t) == doctest::Approx(0.1 * per_unit).epsilon(1e-12));
  const int into_01 = p.net.find_arc(p.node(0, 0, Heading::E), p.node(0, 1, Heading::E));
  CHECK(expected_cell_delay(p.net, p.flow, into_01, t) == doctest::Approx(0.2));
}

TEST_CASE("library cell delay agrees with the categorical oracle") {
  std::mt19937_64 rng(11);
  TimingParams t{1, 4, 1.5, 3.0, 3, 10};
  for (int trial = 0; trial < 5; ++trial) {
    FlowNetwork net = fixtures::standard_network(9, 11, 1, 4, 100 + static_cast<std::uint64_t>(trial), 0.1);
    LinkFlow f = fixtures::random_flow(net, rng);
    // Keep through flow nonnegative so the categorical weights are a distribution.
    for (int a = 0; a < net.arc_count(); ++a) {
      auto k = net.arcs()[static_cast<std::size_t>(a)].kind;
      if (k == ArcKind::Turn || k == ArcKind::Drop) {
        f.fwd[static_cast<std::size_t>(a)] *= 0.1;
        f.bwd[static_cast<std::size_t>(a)] *= 0.1;
      }
    }
    for (int a = 0; a < net.arc_count(); ++a) {
      auto k = net.arcs()[static_cast<std::size_t>(a)].kind;
      if (k != ArcKind::Move && k != ArcKind::StationOut) continue;
      CHECK(expected_cell_delay(net, f, a, t) == doctest::Approx(oracle::cell_delay(net, f, a, t)).epsilon(1e-10));
    }
  }
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(5);
  TimingParams t;
  for (int trial = 0; trial < 20; ++trial) {
    FlowNetwork net = fixtures::standard_network(5, 6, 1, 1, static_cast<std::uint64_t>(trial), 0.1);
    LinkFlow f = fixtures::random_flow(net, rng);
    CHECK(max_rel_gradient_error(net, f, t) < 1e-5);
  }
}

TEST_CASE("load arc gradient at v = 0.1 with deterministic loading") {
  TimingParams t = TimingParams::deterministic(1, 4, 3, 1);
  CHECK(workstation_delay(0.1, t) == doctest::Approx(3.642857).epsilon(1e-6));
  // d/dv [v (3 + 9v / (2(1 - 3v)))] = c(v) + v * 9 / (2 (1 - 3v)^2)
  const double expected = 3.0 + 0.9 / 1.4 + 0.1 * 9.0 / (2 * 0.49);
  CHECK(expected == doctest::Approx(4.561224).epsilon(1e-6));
  RingPath p;
  auto g = cost_gradient(p.net, p.flow, t);
  const int load = p.net.find_arc(p.net.source(), p.net.workstation_node(1));
  CHECK(g[static_cast<std::size_t>(load)] == doctest::Approx(expected).epsilon(1e-12));
  const double h = 1e-6;
  const double fd = ((0.1 + h) * workstation_delay(0.1 + h, t) - (0.1 - h) * workstation_delay(0.1 - h, t)) / (2 * h);
  CHECK(fd == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("saturated workstation throws") {
  TimingParams t;
  CHECK_THROWS_AS(workstation_delay(1.0 / 3.0, t, 2), SaturatedWorkstation);
  CHECK_NOTHROW(workstation_delay(0.33, t));
}

TEST_CASE("cell composition partitions throughput") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    FlowNetwork net = fixtures::standard_network(7, 8, 1, 2, static_cast<std::uint64_t>(trial), 0.1);
    LinkFlow f = fixtures::random_flow(net, rng);
    for (int c = 0; c < net.layout().cell_count(); ++c) {
      CellComposition comp = cell_composition(net, f, c);
      CHECK(std::abs(comp.through + comp.turning + comp.dropping - comp.total) <= 1e-12);
      CHECK(comp.through >= 0);
    }
  }
}

TEST_CASE("total cost is monotone under flow increase") {
  std::mt19937_64 rng(9);
  TimingParams t;
  std::uniform_real_distribution<double> bump(0.0, 0.01);
  for (int trial = 0; trial < 20; ++trial) {
    FlowNetwork net = fixtures::standard_network(5, 6, 1, 1, static_cast<std::uint64_t>(trial), 0.1);
    LinkFlow f = fixtures::random_flow(net, rng, 0.05);
    LinkFlow g = f;
    for (auto& x : g.fwd) x += bump(rng);
    for (auto& x : g.bwd) x += bump(rng);
    CHECK(total_cost(net, g, t) >= total_cost(net, f, t));
  }
}

TEST_CASE("error bound on the ring") {
  RingPath p;
  TimingParams t;
  CHECK(t.occupancy_bound() == 6.0);
  auto bound = approximation_error_bound(p.net, p.flow, t, 2);
  // Arrival into (0,1): downstream (0,2) carries 0.1, so 0.1 * 4 * 36.
  const int into_01 = p.net.find_arc(p.node(0, 0, Heading::E), p.node(0, 1, Heading::E));
  CHECK(bound[static_cast<std::size_t>(into_01)] == doctest::Approx(14.4));
  const int load = p.net.find_arc(p.net.source(), p.net.workstation_node(1));
  CHECK(bound[static_cast<std::size_t>(load)] == 0.0);
  for (double b : bound) CHECK(b >= 0.0);
}

TEST_CASE("timing validation") {
  CHECK_THROWS_AS((TimingParams{0, 4, 1, 1, 3, 9}.validate()), ConfigError);
  CHECK_THROWS_AS((TimingParams{1, 4, 1, 0.5, 3, 9}.validate()), ConfigError);
  CHECK_NOTHROW(TimingParams{}.validate());
}

TEST_CASE("empty robots starting after a drop count toward the cell population") {
  RingPath rp;
  const int cell = rp.net.layout().index(2, 2);
  // The return path starts in (2,2) and nothing arrives there.
  CellComposition c = cell_composition(rp.net, rp.flow, cell);
  CHECK(c.total == doctest::Approx(0.1));
  CHECK(c.through == doctest::Approx(0.1));
  // A trickle of arrivals changes the total cost continuously.
  TimingParams t;
  const double base = total_cost(rp.net, rp.flow, t);
  LinkFlow f = rp.flow;
  const int arrival = rp.net.find_arc(rp.node(2, 3, Heading::W), rp.node(2, 2, Heading::W));
  REQUIRE(arrival >= 0);
  f.fwd[static_cast<std::size_t>(arrival)] += 1e-7;
  CHECK(std::abs(total_cost(rp.net, f, t) - base) < 1e-5);
  CHECK(max_rel_gradient_error(rp.net, rp.flow, t) < 1e-5);
}
