#pragma once

// Event-driven micro-simulation of cell blocking in continuous time.
//
// A cell is held from the moment a robot starts moving into it until that
// robot has completely moved into the next cell, so an unobstructed pass
// holds it for 2 T1. A robot that is fully inside cell i and wants cell j
// waits, still holding i, until j is released; waiting robots are served
// first come first served with a fair coin on exact ties. Sinks are always
// free. Every route starts off-grid with an unbounded queue.

#include <cmath>
#include <map>
#include <queue>
#include <tuple>
#include <vector>

#include "oracles/queue_oracle.hpp"
#include "rss/random.hpp"

namespace oracle {

inline constexpr int kSink = -1;
inline constexpr int kOffGrid = -2;

struct Stream {
  std::vector<int> cells;  // ends with kSink
  double rate = 0;
};

struct WaitStats {
  double sum = 0;
  long count = 0;
  double mean() const { return count > 0 ? sum / static_cast<double>(count) : 0.0; }
};

// Wait statistics keyed by (previous cell or kOffGrid, cell).
using WaitTable = std::map<std::pair<int, int>, WaitStats>;

class BlockingSim {
 public:
  BlockingSim(int cells, std::vector<Stream> streams, double t1, std::uint64_t seed)
      : holder_(static_cast<std::size_t>(cells), -1),
        waiters_(static_cast<std::size_t>(cells)),
        streams_(std::move(streams)),
        t1_(t1),
        rng_(rss::make_rng(seed, 0xc0)) {}

  // Runs until `horizon`; arrivals before `warmup` are not recorded.
  WaitTable run(double horizon, double warmup) {
    warmup_ = warmup;
    for (std::size_t s = 0; s < streams_.size(); ++s) schedule(exponential(rng_, streams_[s].rate), kSpawn, static_cast<int>(s));
    while (!events_.empty()) {
      auto [t, seq, kind, who] = events_.top();
      (void)seq;
      events_.pop();
      if (t > horizon) break;
      if (kind == kSpawn) {
        spawn(who, t);
        schedule(t + exponential(rng_, streams_[static_cast<std::size_t>(who)].rate), kSpawn, who);
      } else {
        arrive(who, t);
      }
    }
    return stats_;
  }

 private:
  enum : int { kSpawn = 0, kArrive = 1 };
  struct Robot {
    int stream = 0;
    int pos = -1;  // index of the cell it is fully inside, -1 before entering
    double ready = 0;
  };
  struct Waiter {
    double ready;
    std::uint64_t tie;
    int robot;
  };
  using Event = std::tuple<double, long, int, int>;

  void schedule(double t, int kind, int who) { events_.emplace(t, next_seq_++, kind, who); }

  const std::vector<int>& route(const Robot& r) const { return streams_[static_cast<std::size_t>(r.stream)].cells; }

  void spawn(int stream, double t) {
    robots_.push_back({stream, -1, t});
    request(static_cast<int>(robots_.size()) - 1, t);
  }

  void request(int id, double t) {
    Robot& r = robots_[static_cast<std::size_t>(id)];
    r.ready = t;
    const int cell = route(r)[static_cast<std::size_t>(r.pos + 1)];
    if (cell == kSink || (holder_[static_cast<std::size_t>(cell)] < 0 && waiters_[static_cast<std::size_t>(cell)].empty())) {
      grant(id, t);
      return;
    }
    waiters_[static_cast<std::size_t>(cell)].push_back({t, rng_(), id});
  }

  void grant(int id, double t) {
    Robot& r = robots_[static_cast<std::size_t>(id)];
    const auto& cells = route(r);
    const int cell = cells[static_cast<std::size_t>(r.pos + 1)];
    const int prev = r.pos >= 0 ? cells[static_cast<std::size_t>(r.pos)] : kOffGrid;
    if (cell != kSink) {
      holder_[static_cast<std::size_t>(cell)] = id;
      if (r.ready >= warmup_) {
        WaitStats& w = stats_[{prev, cell}];
        w.sum += t - r.ready;
        ++w.count;
      }
    }
    schedule(t + t1_, kArrive, id);
  }

  void arrive(int id, double t) {
    Robot& r = robots_[static_cast<std::size_t>(id)];
    const auto& cells = route(r);
    if (r.pos >= 0) release(cells[static_cast<std::size_t>(r.pos)], t);
    ++r.pos;
    if (cells[static_cast<std::size_t>(r.pos)] == kSink) return;
    request(id, t);
  }

  void release(int cell, double t) {
    holder_[static_cast<std::size_t>(cell)] = -1;
    auto& w = waiters_[static_cast<std::size_t>(cell)];
    if (w.empty()) return;
    auto best = w.begin();
    for (auto it = w.begin(); it != w.end(); ++it)
      if (it->ready < best->ready || (it->ready == best->ready && it->tie < best->tie)) best = it;
    const int id = best->robot;
    w.erase(best);
    grant(id, t);
  }

  std::vector<int> holder_;
  std::vector<std::vector<Waiter>> waiters_;
  std::vector<Stream> streams_;
  std::vector<Robot> robots_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  long next_seq_ = 0;
  double t1_ = 1;
  double warmup_ = 0;
  rss::Rng rng_;
  WaitTable stats_;
};

// Five corridor cells, each crossed by its own stream. Cell ids: entry 0,
// corridor 1..5, feeders 6..10.
inline std::vector<Stream> crossing_corridor(double rate) {
  std::vector<Stream> s;
  s.push_back({{0, 1, 2, 3, 4, 5, kSink}, rate});
  for (int j = 0; j < 5; ++j) s.push_back({{6 + j, 1 + j, kSink}, rate});
  return s;
}

// The same corridor inside a valid layout: row 2, columns 2..6, with
// southbound crossings from row 1 to row 3.
inline constexpr const char* kCrossingCorridor = R"(5 9
NE E ES ES ES ES ES E ES
W1 . S S S S S D1 S
NE E ES ES ES ES ES E ES
N . S S S S S . S
WN W W W W W W W SW
)";

}  // namespace oracle
