#include "doctest.h"
#include "fixtures.hpp"
#include "rss/errors.hpp"

using namespace rss;

TEST_CASE("ring network nodes and arcs") {
  FlowNetwork net = fixtures::ring_network(0.1);
  const Layout& l = net.layout();
  // S, T, W1, D1 and one node per allowed heading.
  int headings = 0;
  for (int c = 0; c < l.cell_count(); ++c) headings += l.at(c).headings.size();
  CHECK(net.node_count() == 4 + headings);
  CHECK(net.nodes()[static_cast<std::size_t>(net.workstation_node(1))].kind == NodeKind::Workstation);
  CHECK(net.nodes()[static_cast<std::size_t>(net.dropoff_node(1))].kind == NodeKind::DropOff);

  const int c00 = l.index(0, 0);
  const int n00 = net.cell_node(c00, Heading::N);
  const int e00 = net.cell_node(c00, Heading::E);
  REQUIRE(n00 >= 0);
  REQUIRE(e00 >= 0);
  CHECK(net.cell_node(c00, Heading::S) == -1);

  const int turn = net.find_arc(n00, e00);
  REQUIRE(turn >= 0);
  CHECK(net.arcs()[static_cast<std::size_t>(turn)].kind == ArcKind::Turn);
  CHECK(net.arcs()[static_cast<std::size_t>(turn)].forward);
  CHECK(net.arcs()[static_cast<std::size_t>(turn)].backward);

  const int out = net.find_arc(net.workstation_node(1), n00);
  REQUIRE(out >= 0);
  CHECK(net.arcs()[static_cast<std::size_t>(out)].kind == ArcKind::StationOut);
  CHECK(net.arcs()[static_cast<std::size_t>(out)].forward);
  CHECK_FALSE(net.arcs()[static_cast<std::size_t>(out)].backward);

  const int in = net.find_arc(net.cell_node(l.index(2, 0), Heading::N), net.workstation_node(1));
  REQUIRE(in >= 0);
  CHECK(net.arcs()[static_cast<std::size_t>(in)].kind == ArcKind::StationIn);
  CHECK(net.arcs()[static_cast<std::size_t>(in)].backward);

  // Move arcs keep the heading.
  CHECK(net.find_arc(e00, net.cell_node(l.index(0, 1), Heading::E)) >= 0);
  // No Move into a cell that does not allow the heading.
  CHECK(net.find_arc(net.cell_node(l.index(0, 1), Heading::E), net.cell_node(l.index(0, 2), Heading::N)) == -1);
}

TEST_CASE("arcs are sorted by tail then head and indexed both ways") {
  FlowNetwork net = fixtures::standard_network(7, 8, 1, 2, 3, 0.05);
  for (int a = 1; a < net.arc_count(); ++a) {
    const Arc& p = net.arcs()[static_cast<std::size_t>(a - 1)];
    const Arc& q = net.arcs()[static_cast<std::size_t>(a)];
    CHECK((p.tail < q.tail || (p.tail == q.tail && p.head < q.head)));
  }
  for (int a = 0; a < net.arc_count(); ++a) {
    const Arc& arc = net.arcs()[static_cast<std::size_t>(a)];
    CHECK(net.find_arc(arc.tail, arc.head) == a);
    CHECK((arc.forward || arc.backward));
  }
}

TEST_CASE("cells have at most two approaches on generated layouts") {
  FlowNetwork net = fixtures::standard_network(19, 20, 2, 30, 7, 0.1);
  for (int c = 0; c < net.layout().cell_count(); ++c) CHECK(net.cell_arcs(c).approaches.size() <= 2);
}

TEST_CASE("commodities come in forward/backward pairs") {
  FlowNetwork net = fixtures::standard_network(7, 8, 1, 2, 3, 0.05);
  REQUIRE(net.commodities().size() == 4);
  int fwd = 0;
  for (const Commodity& k : net.commodities()) {
    fwd += k.direction == Direction::Forward;
    CHECK(k.demand == doctest::Approx(0.05 / 2));
  }
  CHECK(fwd == 2);
}

TEST_CASE("reachability respects direction classes") {
  FlowNetwork net = fixtures::ring_network(0.1);
  auto f = reachable(net, net.source(), Direction::Forward);
  CHECK(f[static_cast<std::size_t>(net.dropoff_node(1))]);
  CHECK(f[static_cast<std::size_t>(net.sink())]);
  auto b = reachable(net, net.dropoff_node(1), Direction::Backward);
  CHECK(b[static_cast<std::size_t>(net.source())]);
  CHECK_FALSE(b[static_cast<std::size_t>(net.sink())]);
}

TEST_CASE("demand validation") {
  CHECK_THROWS_AS(build_flow_network(fixtures::ring(), Demand::uniform(2, 0.1)), InvalidDemand);
  CHECK_THROWS_AS(build_flow_network(fixtures::ring(), Demand{{-0.1}}), InvalidDemand);
  Demand d = parse_demand_csv("dropoff_id,demand\n1,0.25\n", 1);
  CHECK(d.total() == doctest::Approx(0.25));
  CHECK_THROWS_AS(parse_demand_csv("dropoff_id,demand\n3,0.25\n", 1), InvalidDemand);
}

TEST_CASE("disconnected commodity is reported") {
  // D1 only touches a cell nothing can enter.
  Layout l = parse_layout("5 4\nNE E E ES\nW1 . . S\nWN W W SW\n. . . .\n. D1 E .\n");
  try {
    build_flow_network(l, Demand::uniform(1, 0.1));
    FAIL("expected DisconnectedCommodity");
  } catch (const DisconnectedCommodity& e) {
    CHECK(e.forward);
    CHECK(e.dropoff == 1);
  }
}
