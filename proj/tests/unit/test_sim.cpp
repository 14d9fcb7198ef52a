#include <algorithm>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "rss/decompose.hpp"
#include "rss/errors.hpp"
#include "rss/sim.hpp"
#include "rss/solver.hpp"

using namespace rss;

namespace {

struct RingSetup {
  FlowNetwork net = fixtures::ring_network(0.02);
  TimingParams timing;
  StaticRouter router{net, timing};
  ReservationTable table{net.layout().cell_count()};

  int cell(int r, int c) const { return net.layout().index(r, c); }
  int node(int r, int c, Heading h) const { return net.cell_node(cell(r, c), h); }
};

struct Pipeline {
  FlowNetwork net;
  SolveResult solved;
  PathFlowTable paths;
  SplitTable split;

  Pipeline(FlowNetwork n, std::uint64_t seed = 1)
      : net(std::move(n)), solved(frank_wolfe(net, TimingParams{})), paths(decompose(seed)), split(build_split_table(net, paths)) {}

 private:
  PathFlowTable decompose(std::uint64_t seed) {
    Rng rng = make_rng(seed, 0);
    return decompose_flow(net, solved.flow, rng);
  }
};

std::vector<StepKind> kinds(const TimedPlan& p) {
  std::vector<StepKind> k;
  for (const Step& s : p.steps) k.push_back(s.kind);
  return k;
}

Metrics run(const Pipeline& p, Policy policy, int robots, int ticks, std::uint64_t seed = 1) {
  SimConfig c;
  c.policy = policy;
  c.robots = robots;
  c.ticks = ticks;
  c.seed = seed;
  return simulate(p.net, &p.split, TimingParams{}, c);
}

}  // namespace

TEST_CASE("reservation table bookkeeping") {
  ReservationTable t(4);
  CHECK(t.free_at(1, 5, 0));
  t.reserve(1, 5, 7);
  CHECK(t.owner(1, 5) == 7);
  CHECK_FALSE(t.free_at(1, 5, 0));
  CHECK(t.free_at(1, 5, 7));
  CHECK(t.free_at(1, 6, 0));
  CHECK_FALSE(t.free_from(1, 3, 0));
  CHECK(t.free_from(1, 6, 0));

  t.park(2, 10, 3);
  CHECK(t.free_at(2, 9, 0));
  CHECK_FALSE(t.free_at(2, 10, 0));
  CHECK_FALSE(t.free_at(2, 1000, 0));
  CHECK(t.owner(2, 50) == 3);

  t.release(7);
  CHECK(t.owner(1, 5) == -1);
  t.release(3);
  CHECK(t.free_from(2, 0, 0));

  t.reserve(0, 1, 1);
  t.reserve(0, 9, 1);
  t.prune_before(5);
  CHECK(t.owner(0, 1) == -1);
  CHECK(t.owner(0, 9) == 1);
  CHECK(t.size() == 1);
}

TEST_CASE("free-flow plan from the workstation") {
  RingSetup s;
  PlanGoal goal{1, 0};
  TimedPlan p = ca_star_plan(s.router, s.table, 0, s.net.workstation_node(1), goal, 10, 60, 1);
  // exit 1 + turn 4 + two moves
  CHECK(p.start_tick == 10);
  CHECK(p.end_tick() == 17);
  CHECK(kinds(p) == std::vector<StepKind>{StepKind::Exit, StepKind::Turn, StepKind::Move, StepKind::Move, StepKind::Drop});
  std::vector<int> cells{s.cell(0, 0), s.cell(0, 0), s.cell(0, 0), s.cell(0, 0), s.cell(0, 0), s.cell(0, 1), s.cell(0, 2)};
  CHECK(p.cells == cells);
  for (std::size_t i = 0; i < cells.size(); ++i) CHECK(s.table.owner(cells[i], 11 + static_cast<int>(i)) == 0);
  // parked on the drop cell until replanned
  CHECK(s.table.owner(s.cell(0, 2), 500) == 0);
}

TEST_CASE("corridor plan waits one tick behind a reservation") {
  RingSetup s;
  PlanGoal goal{1, 0};
  const int start = s.node(0, 0, Heading::E);
  TimedPlan free_run = ca_star_plan(s.router, s.table, 0, start, goal, 0, 40, 1);
  CHECK(free_run.end_tick() == 2);

  ReservationTable t(s.net.layout().cell_count());
  t.reserve(s.cell(0, 1), 1, 5);
  TimedPlan p = ca_star_plan(s.router, t, 0, start, goal, 0, 40, 1);
  CHECK(p.end_tick() == 3);
  CHECK(kinds(p) == std::vector<StepKind>{StepKind::Wait, StepKind::Move, StepKind::Move, StepKind::Drop});
}

TEST_CASE("fully reserved horizon has no plan") {
  RingSetup s;
  for (int t = 0; t <= 30; ++t) s.table.reserve(s.cell(0, 1), t, 5);
  CHECK_THROWS_AS(ca_star_plan(s.router, s.table, 0, s.node(0, 0, Heading::E), PlanGoal{1, 0}, 0, 20, 1),
                  NoPathWithinHorizon);
  // The failed search leaves the table untouched.
  CHECK(s.table.owner(s.cell(0, 0), 1) == -1);
}

TEST_CASE("return plan enters the workstation") {
  RingSetup s;
  TimedPlan p = ca_star_plan(s.router, s.table, 2, s.node(0, 2, Heading::E), PlanGoal{0, 1}, 0, 80, 1);
  // E, turn S, two moves, turn W, three moves, turn N, enter
  CHECK(p.end_tick() == 1 + 4 + 2 + 4 + 3 + 4 + 1);
  CHECK(p.steps.back().kind == StepKind::Enter);
  CHECK(p.cells.back() == -1);
}

TEST_CASE("steps from a static route") {
  RingSetup s;
  std::vector<int> route = s.router.route(s.net.workstation_node(1), s.net.dropoff_node(1));
  std::vector<Step> steps = steps_from_route(s.net, route);
  REQUIRE(steps.size() == route.size() - 1);
  CHECK(steps.front().kind == StepKind::Exit);
  CHECK(steps[1].kind == StepKind::Turn);
  CHECK(steps.back().kind == StepKind::Drop);
  CHECK(steps.back().node == s.net.dropoff_node(1));
}

TEST_CASE("traffic control basics") {
  Rng rng = make_rng(3, 0);
  std::vector<int> occupant(6, -1);

  SUBCASE("lone robot advances") {
    occupant[0] = 0;
    TrafficDecision d = traffic_control_step({{0, 1}}, occupant, rng);
    CHECK(d.granted[0]);
    CHECK(d.waits_for.empty());
  }
  SUBCASE("stationary robot ahead blocks its follower") {
    occupant[0] = 0;
    occupant[1] = 1;
    TrafficDecision d = traffic_control_step({{0, 1}}, occupant, rng);
    CHECK_FALSE(d.granted[0]);
    CHECK(d.waits_for == std::vector<std::pair<int, int>>{{0, 1}});
  }
  SUBCASE("a train moves together") {
    occupant[0] = 0;
    occupant[1] = 1;
    occupant[2] = 2;
    TrafficDecision d = traffic_control_step({{0, 1}, {1, 2}, {2, 3}}, occupant, rng);
    CHECK(std::all_of(d.granted.begin(), d.granted.end(), [](char g) { return g != 0; }));
  }
  SUBCASE("closed ring waits") {
    for (int i = 0; i < 4; ++i) occupant[static_cast<std::size_t>(i)] = i;
    TrafficDecision d = traffic_control_step({{0, 1}, {1, 2}, {2, 3}, {3, 0}}, occupant, rng);
    CHECK(std::none_of(d.granted.begin(), d.granted.end(), [](char g) { return g != 0; }));
    CHECK(find_wait_cycles(d.waits_for) == std::vector<std::vector<int>>{{0, 1, 2, 3}});
  }
}

TEST_CASE("contested cell is a fair coin") {
  Rng rng = make_rng(11, 0);
  std::vector<int> occupant(3, -1);
  occupant[0] = 0;
  occupant[2] = 1;
  int first = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    TrafficDecision d = traffic_control_step({{0, 1}, {1, 1}}, occupant, rng);
    REQUIRE(d.granted[0] != d.granted[1]);
    REQUIRE(d.waits_for.size() == 1);
    first += d.granted[0] ? 1 : 0;
  }
  CHECK(std::abs(first / static_cast<double>(n) - 0.5) <= 0.02);
}

TEST_CASE("wait cycles") {
  CHECK(find_wait_cycles({}).empty());
  CHECK(find_wait_cycles({{0, 1}, {1, 2}}).empty());
  CHECK(find_wait_cycles({{4, 2}, {2, 4}, {7, 4}}) == std::vector<std::vector<int>>{{2, 4}});
  CHECK(find_wait_cycles({{3, 1}, {1, 3}, {5, 6}, {6, 8}, {8, 5}}) == std::vector<std::vector<int>>{{1, 3}, {5, 6, 8}});
}

TEST_CASE("deadlock resolution") {
  std::vector<int> tried;
  SUBCASE("no cycles, nothing to do") {
    DeadlockOutcome out = detect_resolve_deadlocks({{0, 1}}, [&](int r) {
      tried.push_back(r);
      return true;
    });
    CHECK(out.rerouted.empty());
    CHECK(out.unresolvable.empty());
    CHECK(tried.empty());
  }
  SUBCASE("2-cycle reroutes the lowest id") {
    DeadlockOutcome out = detect_resolve_deadlocks({{5, 2}, {2, 5}}, [&](int r) {
      tried.push_back(r);
      return true;
    });
    CHECK(out.rerouted == std::vector<int>{2});
    CHECK(tried == std::vector<int>{2});
  }
  SUBCASE("ring with no detour is logged") {
    DeadlockOutcome out =
        detect_resolve_deadlocks({{0, 1}, {1, 2}, {2, 3}, {3, 0}}, [&](int r) {
          tried.push_back(r);
          return false;
        });
    CHECK(out.rerouted.empty());
    CHECK(out.unresolvable == std::vector<std::vector<int>>{{0, 1, 2, 3}});
    CHECK(tried == std::vector<int>{0, 1, 2, 3});
  }
}

TEST_CASE("policy helpers") {
  Rng rng = make_rng(5, 0);
  int ones = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) ones += policy_random_workstation(2, rng) == 1;
  CHECK(std::abs(ones / static_cast<double>(n) - 0.5) < 0.01);
  CHECK_THROWS_AS(policy_random_workstation(0, rng), ConfigError);

  int zone1 = 0;
  for (int i = 0; i < 20; ++i) zone1 += robot_zone(i, 2) == 1;
  CHECK(zone1 == 10);

  CHECK(parse_policy("optimal") == Policy::FlowGuided);
  CHECK(parse_policy("ra") == Policy::RandomCA);
  CHECK(parse_policy(policy_name(Policy::ZoningCA)) == Policy::ZoningCA);
  CHECK_THROWS_AS(parse_policy("fastest"), ConfigError);
}

TEST_CASE("zones pick the shortest round trip") {
  FlowNetwork net = fixtures::standard_network(9, 11, 2, 6, 4, 0.05);
  StaticRouter router(net, TimingParams{});
  std::vector<int> zones = build_zones(router);
  REQUIRE(zones.size() == 6);
  std::set<int> used;
  for (int d = 1; d <= 6; ++d) {
    const int z = zones[static_cast<std::size_t>(d - 1)];
    used.insert(z);
    for (int w = 1; w <= 2; ++w) CHECK(router.round_trip_ticks(z, d) <= router.round_trip_ticks(w, d));
  }
  CHECK(used.size() == 2);
}

TEST_CASE("no robots, no throughput") {
  Pipeline p(fixtures::ring_network(0.02));
  for (Policy pol : {Policy::FlowGuided, Policy::RandomCA, Policy::ZoningCA}) {
    Metrics m = run(p, pol, 0, 500);
    CHECK(m.throughput == 0.0);
    CHECK(m.drops == 0);
  }
}

TEST_CASE("a single robot on the ring delivers every 30 ticks") {
  // Forward: load 3, exit 1, turn 4, 2 moves, drop 1 = 11.
  // Return: 1 move, turn, 2 moves, turn, 3 moves, turn, enter = 19.
  // Drops complete at 11 + 30k; 90 of them land in [300, 3000).
  Pipeline p(fixtures::ring_network(0.02));
  for (Policy pol : {Policy::FlowGuided, Policy::RandomCA, Policy::ZoningCA}) {
    CAPTURE(policy_name(pol));
    Metrics m = run(p, pol, 1, 3000);
    CHECK(m.window_start == 300);
    CHECK(m.drops == 100);
    CHECK(m.drops_in_window == 90);
    CHECK(m.throughput == doctest::Approx(1.0 / 30.0).epsilon(1e-12));
    CHECK(m.mean_trip_ticks == doctest::Approx(11.0));
    CHECK(m.safety.ok());
    CHECK(m.cell_turns[static_cast<std::size_t>(p.net.layout().index(0, 0))] == 100);
  }
}

TEST_CASE("simulation rejects bad configs") {
  Pipeline p(fixtures::ring_network(0.02));
  SimConfig c;
  c.robots = 1;
  c.ticks = 10;
  CHECK_THROWS_AS(simulate(p.net, nullptr, TimingParams{}, c), ConfigError);
  c.robots = 100;
  CHECK_THROWS_AS(simulate(p.net, &p.split, TimingParams{}, c), ConfigError);
  c.robots = 1;
  TimingParams odd = TimingParams::deterministic(1.0, 2.5, 3.0, 1.0);
  CHECK_THROWS_AS(simulate(p.net, &p.split, odd, c), ConfigError);
}

TEST_CASE("busy layout stays safe and deterministic") {
  Pipeline p(fixtures::standard_network(9, 11, 2, 6, 4, 0.05));
  for (Policy pol : {Policy::FlowGuided, Policy::RandomCA, Policy::ZoningCA}) {
    CAPTURE(policy_name(pol));
    Metrics a = run(p, pol, 8, 600, 3);
    Metrics b = run(p, pol, 8, 600, 3);
    CHECK(a.safety.ok());
    CHECK(a.drops > 0);
    CHECK(a.drops == b.drops);
    CHECK(a.throughput == b.throughput);
    CHECK(a.arc_fwd == b.arc_fwd);
    CHECK(a.arc_bwd == b.arc_bwd);
    CHECK(a.cell_turns == b.cell_turns);
    // every robot-tick is accounted for
    CHECK(a.queued_ticks + a.loading_ticks + a.moving_ticks + a.turning_ticks + a.dropping_ticks + a.blocked_ticks ==
          8L * 600);
  }
}

TEST_CASE("flow-guided robots carry parcels only along decomposed paths") {
  Pipeline p(fixtures::standard_network(9, 11, 2, 6, 4, 0.05));
  Metrics m = run(p, Policy::FlowGuided, 6, 1500, 9);
  REQUIRE(m.reroutes == 0);
  REQUIRE(m.parcel_fallbacks == 0);
  std::vector<char> used(static_cast<std::size_t>(p.net.arc_count()), 0);
  for (const PathFlow& e : p.paths.entries) {
    if (e.direction != Direction::Forward) continue;
    for (std::size_t i = 1; i < e.nodes.size(); ++i) used[static_cast<std::size_t>(p.net.find_arc(e.nodes[i - 1], e.nodes[i]))] = 1;
  }
  for (int a = 0; a < p.net.arc_count(); ++a)
    if (m.arc_fwd[static_cast<std::size_t>(a)] > 0) CHECK(used[static_cast<std::size_t>(a)]);
}
