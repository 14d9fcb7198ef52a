#include <cmath>

#include "doctest.h"
#include "oracles/corridor_oracle.hpp"
#include "oracles/queue_oracle.hpp"
#include "rss/delay.hpp"

using namespace rss;

namespace {

struct CorridorFlow {
  FlowNetwork net = build_flow_network(parse_layout(oracle::kCrossingCorridor), Demand::uniform(1, 0.0));
  LinkFlow flow{net.arc_count()};

  int node(int r, int c, Heading h) const { return net.cell_node(net.layout().index(r, c), h); }
  int move(int r, int c, Heading h) const {
    const int from = node(r, c, h);
    const int to = node(r + dr(h), c + dc(h), h);
    return net.find_arc(from, to);
  }

  explicit CorridorFlow(double rate) {
    for (int c = 0; c <= 6; ++c) flow.fwd[static_cast<std::size_t>(move(2, c, Heading::E))] = rate;
    for (int c = 2; c <= 6; ++c)
      for (int r = 0; r <= 2; ++r) flow.fwd[static_cast<std::size_t>(move(r, c, Heading::S))] = rate;
  }
};

}  // namespace

TEST_CASE("M/D/1 oracle matches the Pollaczek-Khinchin mean") {
  TimingParams t = TimingParams::deterministic(1, 4, 3, 1);
  CHECK(workstation_delay(0.1, t) == doctest::Approx(3.642857).epsilon(1e-6));
  oracle::QueueEstimate q = oracle::md1(0.1, 3.0, 200000, 1);
  CHECK(q.utilization == doctest::Approx(0.3).epsilon(0.02));
  CHECK(q.mean_sojourn == doctest::Approx(3.642857).epsilon(0.03));
}

TEST_CASE("M/M/1 oracle sanity") {
  // mean sojourn 1 / (mu - lambda)
  oracle::QueueEstimate q = oracle::mg1(0.5, [](Rng& r) { return oracle::exponential(r, 1.0); }, 400000, 2);
  CHECK(q.mean_sojourn == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("lone stream never waits past its entry") {
  oracle::BlockingSim sim(3, {{{0, 1, 2, oracle::kSink}, 0.05}}, 1.0, 4);
  oracle::WaitTable w = sim.run(2e5, 100);
  CHECK(w[{0, 1}].mean() == 0.0);
  CHECK(w[{1, 2}].mean() == 0.0);
  // The entry cell is an M/D/1 server with service 2 T1.
  const double rho = 0.05 * 2;
  CHECK(w[{oracle::kOffGrid, 0}].mean() == doctest::Approx(0.05 * 4 / (2 * (1 - rho))).epsilon(0.05));
}

TEST_CASE("crossing corridor prediction by hand") {
  // v_j = 0.1 with G = 2 for everyone: 0.1 / 2 * 4 + 0.05 / 2 * 2 * 2
  CorridorFlow cf(0.05);
  TimingParams t;
  for (int c = 2; c <= 6; ++c) {
    CHECK(expected_cell_delay(cf.net, cf.flow, cf.move(2, c - 1, Heading::E), t) == doctest::Approx(0.3));
    CHECK(expected_cell_delay(cf.net, cf.flow, cf.move(1, c, Heading::S), t) == doctest::Approx(0.3));
  }
}

TEST_CASE("crossing corridor micro-simulation is reproducible and symmetric") {
  auto run = [](std::uint64_t seed) {
    oracle::BlockingSim sim(11, oracle::crossing_corridor(0.05), 1.0, seed);
    return sim.run(2e5, 1000);
  };
  oracle::WaitTable a = run(7), b = run(7);
  CHECK(a[{0, 1}].sum == b[{0, 1}].sum);
  // At the first crossing both streams are Poisson and meet symmetrically.
  CHECK(a[{0, 1}].mean() == doctest::Approx(a[{6, 1}].mean()).epsilon(0.15));
  // Followers from the same approach are never blocked by their predecessor,
  // so waits stay below the all-flow residual v_j E[G^2] / 2 = 0.2.
  for (int j = 0; j < 5; ++j) CHECK(a[{6 + j, j + 1}].mean() < 0.2);
}
