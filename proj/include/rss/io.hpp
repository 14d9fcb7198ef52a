#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rss/decompose.hpp"
#include "rss/sim.hpp"
#include "rss/solver.hpp"

namespace rss::io {

// Shortest text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

std::string read_file(const std::string& path);
// Writes through a temporary file and renames, so readers never see half a file.
void write_file(const std::string& path, std::string_view content);

// arc_id,tail,head,kind,flow_fwd,flow_bwd
std::string solution_csv(const FlowNetwork& net, const LinkFlow& flow);
LinkFlow parse_solution_csv(const FlowNetwork& net, std::string_view text);

// A "# key=value,..." summary line, then iter,tc,tc_linear,alpha,residual.
std::string trace_csv(const SolveTrace& trace);
SolveTrace parse_trace_csv(std::string_view text);

// direction,dropoff,workstation,intensity,nodes with nodes a quoted,
// space-separated list of node labels.
std::string path_flow_csv(const FlowNetwork& net, const PathFlowTable& table);
PathFlowTable parse_path_flow_csv(const FlowNetwork& net, std::string_view text);

// rows x cols matrix of per-cell counts (void and station cells are 0).
std::string heatmap_csv(const Layout& layout, const std::vector<long>& per_cell);
std::vector<long> parse_heatmap_csv(const Layout& layout, std::string_view text);
// The same matrix for real-valued maps such as the optimal turning flow.
std::string heatmap_values_csv(const Layout& layout, const std::vector<double>& per_cell);
std::vector<double> parse_heatmap_values_csv(const Layout& layout, std::string_view text);

// One simulated trial.
struct TrialRecord {
  std::string config_hash;
  std::string policy;
  int robots = 0;
  double lambda = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  int ticks = 0;
  double throughput = 0.0;
  long drops = 0;
  long drops_in_window = 0;
  int deadlocks = 0;
  int reroutes = 0;
  bool flagged = false;
  double mean_trip_ticks = 0.0;
  SafetyCounters safety;

  bool operator==(const TrialRecord&) const;
};

TrialRecord make_record(const Metrics& m, std::string config_hash, Policy policy, int robots, double lambda, int trial,
                        std::uint64_t seed);
std::string to_json_line(const TrialRecord& r);
TrialRecord parse_json_line(std::string_view line);
std::vector<TrialRecord> parse_metrics_jsonl(std::string_view text);

}  // namespace rss::io
