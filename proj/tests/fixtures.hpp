#pragma once

#include <random>

#include "rss/delay.hpp"
#include "rss/layout.hpp"
#include "rss/network.hpp"

namespace fixtures {

// One workstation, one drop-off, a single clockwise loop.
inline constexpr const char* kRing = R"(3 4
NE E E ES
W1 . D1 S
WN W W SW
)";

// Symmetric under transposition (N<->W, E<->S), which swaps W1 and W2.
inline constexpr const char* kMirror = R"(3 3
. NE W1
WS NW SW
W2 EN D1
)";

// Only one sensible route each way.
inline constexpr const char* kHook = R"(3 4
NE E E ES
W1 . . S
WN W D1 SW
)";

inline rss::Layout ring() { return rss::parse_layout(kRing); }

inline rss::FlowNetwork ring_network(double lambda) {
  return rss::build_flow_network(ring(), rss::Demand::uniform(1, lambda));
}

inline rss::FlowNetwork standard_network(int rows, int cols, int n_w, int n_d, std::uint64_t seed, double lambda) {
  return rss::build_flow_network(rss::generate_standard_layout(rows, cols, n_w, n_d, seed),
                                 rss::Demand::uniform(n_d, lambda));
}

// Strictly positive random flow on every arc, loads well below saturation.
inline rss::LinkFlow random_flow(const rss::FlowNetwork& net, std::mt19937_64& rng, double hi = 0.1) {
  std::uniform_real_distribution<double> u(0.01, hi);
  rss::LinkFlow f(net.arc_count());
  for (int a = 0; a < net.arc_count(); ++a) {
    f.fwd[static_cast<std::size_t>(a)] = u(rng);
    f.bwd[static_cast<std::size_t>(a)] = u(rng);
  }
  return f;
}

inline int arc(const rss::FlowNetwork& net, int tail, int head) { return net.find_arc(tail, head); }

}  // namespace fixtures
