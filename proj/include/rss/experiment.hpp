#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "rss/decompose.hpp"
#include "rss/io.hpp"
#include "rss/sim.hpp"
#include "rss/solver.hpp"

namespace rss {

// Either a layout file or the standard generator.
struct LayoutSource {
  std::string path;
  int rows = 19;
  int cols = 20;
  int workstations = 2;
  int dropoffs = 30;
  std::uint64_t seed = 7;
};

struct ExperimentConfig {
  LayoutSource layout;
  TimingParams timing = TimingParams::deterministic(1, 4, 3, 1);
  std::vector<double> lambdas{0.1};  // total estimated throughput, spread uniformly
  std::string demand_path;           // per-drop-off demand CSV; replaces the lambda sweep
  SolverConfig solver;
  std::uint64_t decompose_seed = 1;
  std::vector<Policy> policies{Policy::FlowGuided, Policy::RandomCA, Policy::ZoningCA};
  std::vector<int> robots{20};
  int ticks = 3000;
  double warmup_fraction = 0.1;
  int horizon = 0;
  int trials = 10;
  std::uint64_t seed_base = 1;
  int threads = 0;  // 0 = hardware concurrency
  std::string out_dir = "out";

  // Throws ConfigError; checks referenced files exist.
  void validate() const;
};

// JSON object; unknown keys are rejected. Relative paths resolve against base_dir.
ExperimentConfig parse_config(std::string_view json_text, const std::string& base_dir = "");
ExperimentConfig load_config(const std::string& path);
// Canonical JSON of every field, the input of config_hash.
std::string config_json(const ExperimentConfig& cfg);

std::string fnv1a_hex(std::string_view bytes);
std::string config_hash(const ExperimentConfig& cfg);

// Seed of trial `trial`; distinct per trial and shared by all policies, so
// trials of different policies with the same index see the same parcel
// stream when their policies agree.
inline std::uint64_t trial_seed(std::uint64_t base, int trial) { return base + static_cast<std::uint64_t>(trial); }

Layout load_layout(const ExperimentConfig& cfg);
// The demand for sweep value `lambda` (ignored when demand_path is set).
Demand make_demand(const ExperimentConfig& cfg, const Layout& layout, double lambda);
// Lambda values actually swept: the configured list, or the file's total.
std::vector<double> sweep_lambdas(const ExperimentConfig& cfg, const Layout& layout);

// Offline artifacts for one (layout, demand, timing, solver) input. The
// split table points into `paths`, so a pipeline never moves.
struct Pipeline {
  Pipeline() = default;
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  std::string hash;
  FlowNetwork net;
  SolveResult solved;
  PathFlowTable paths;
  SplitTable split;
};

// Content hash of the offline inputs for sweep value `lambda`.
std::string offline_hash(const ExperimentConfig& cfg, const Layout& layout, double lambda);
std::shared_ptr<const Pipeline> build_pipeline(const ExperimentConfig& cfg, const Layout& layout, double lambda);

// Thread-safe memo of pipelines keyed by offline_hash. With a directory,
// artifacts also live on disk under <dir>/<hash>/ (layout.txt, solution.csv,
// trace.csv, paths.csv) and are reused by later runs.
class PipelineCache {
 public:
  explicit PipelineCache(std::string dir = "") : dir_(std::move(dir)) {}

  // Solution and trace only; loads or writes the disk copy.
  SolveResult solve(const ExperimentConfig& cfg, const Layout& layout, double lambda);
  std::shared_ptr<const Pipeline> get(const ExperimentConfig& cfg, const Layout& layout, double lambda);
  std::size_t size() const;
  // "" without a disk cache.
  std::string artifact_dir(const std::string& hash) const;

 private:
  std::string dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const Pipeline>> entries_;
};

// Per-cell flow on Turn arcs (forward + backward), the optimal turning flow.
std::vector<double> cell_turning_flow(const FlowNetwork& net, const LinkFlow& flow);

struct TrialSpec {
  Policy policy = Policy::FlowGuided;
  int robots = 0;
  double lambda = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
};

// Every (lambda, policy, robots, trial) combination in a fixed order.
std::vector<TrialSpec> trial_specs(const ExperimentConfig& cfg);

struct TrialOutcome {
  TrialSpec spec;
  Metrics metrics;
  io::TrialRecord record;
};

// Runs the trials on a worker pool; the result order matches `specs`.
std::vector<TrialOutcome> run_trials(const ExperimentConfig& cfg, const Layout& layout, PipelineCache& cache,
                                     const std::vector<TrialSpec>& specs);

// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace rss
