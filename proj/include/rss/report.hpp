#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rss/io.hpp"

namespace rss {

// Table columns: max, upper quartile, median, lower quartile, min, mean.
// Quartiles interpolate linearly between order statistics.
struct SummaryStats {
  int n = 0;
  double max = 0, q75 = 0, median = 0, q25 = 0, min = 0, mean = 0;
  bool operator==(const SummaryStats&) const = default;
};

SummaryStats summarize(std::vector<double> values);

struct GroupSummary {
  std::string policy;
  int robots = 0;
  double lambda = 0.0;
  int flagged = 0;           // flagged trials in the group (excluded unless requested)
  SummaryStats throughput;
  SummaryStats improvement;  // percent over a randomly paired RA trial; n = 0 when unpaired
  bool operator==(const GroupSummary&) const = default;
};

struct Report {
  std::vector<GroupSummary> groups;        // sorted by (lambda, robots, policy)
  std::vector<io::TrialRecord> flagged;    // outliers, always listed
  std::vector<std::string> warnings;       // empty groups, missing RA baselines
};

// Each trial of a non-RA group is paired with one RA trial of the same
// (robots, lambda), drawn uniformly with the seeded stream.
Report build_report(const std::vector<io::TrialRecord>& records, bool include_flagged, std::uint64_t pairing_seed = 1);

std::string report_csv(const Report& report);
std::vector<GroupSummary> parse_report_csv(std::string_view text);
// Fixed-width table for terminals.
std::string report_text(const Report& report);

}  // namespace rss
