#pragma once

// Single-server FIFO queue with Poisson arrivals, simulated customer by
// customer with the Lindley recursion.

#include <cmath>
#include <functional>

#include "rss/random.hpp"

namespace oracle {

struct QueueEstimate {
  double mean_sojourn = 0;
  double mean_wait = 0;
  double utilization = 0;
  long customers = 0;
};

inline double exponential(rss::Rng& rng, double rate) { return -std::log1p(-rss::uniform01(rng)) / rate; }

// `service` draws one service time.
inline QueueEstimate mg1(double rate, const std::function<double(rss::Rng&)>& service, long customers,
                         std::uint64_t seed) {
  rss::Rng rng = rss::make_rng(seed, 0x9e11);
  double wait = 0, prev_service = 0, sum_wait = 0, sum_service = 0, clock = 0;
  for (long i = 0; i < customers; ++i) {
    const double gap = exponential(rng, rate);
    if (i > 0) wait = std::max(0.0, wait + prev_service - gap);
    clock += gap;
    prev_service = service(rng);
    sum_wait += wait;
    sum_service += prev_service;
  }
  QueueEstimate q;
  q.customers = customers;
  q.mean_wait = sum_wait / static_cast<double>(customers);
  q.mean_sojourn = q.mean_wait + sum_service / static_cast<double>(customers);
  q.utilization = sum_service / clock;
  return q;
}

inline QueueEstimate md1(double rate, double service, long customers, std::uint64_t seed) {
  return mg1(rate, [service](rss::Rng&) { return service; }, customers, seed);
}

}  // namespace oracle
