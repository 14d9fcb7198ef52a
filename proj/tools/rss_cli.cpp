// Command line front end: solve, decompose, simulate, report, validate-layout.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rss/errors.hpp"
#include "rss/experiment.hpp"
#include "rss/io.hpp"
#include "rss/report.hpp"
#include "rss/sim.hpp"

namespace fs = std::filesystem;
using namespace rss;

namespace {

enum Exit { kOk = 0, kConfig = 1, kInfeasible = 2, kInternal = 3 };

struct Overrides {
  std::string config;
  std::string out;
  std::uint64_t seed_base = 0;
  int trials = 0;
  int ticks = 0;
  int threads = -1;
  std::vector<std::string> policies;
  std::vector<int> robots;
  std::vector<double> lambdas;
  bool include_flagged = false;
  std::vector<std::string> inputs;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "experiment config (JSON); defaults reproduce the standard protocol");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed-base", o.seed_base, "seed of trial 0; trial t uses seed-base + t");
  cmd->add_option("--trials", o.trials, "trials per (policy, robots, lambda)");
  cmd->add_option("--ticks", o.ticks, "simulated ticks per trial");
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  cmd->add_option("--policies", o.policies, "comma list of optimal, ra, zoning")->delimiter(',');
  cmd->add_option("--robots", o.robots, "comma list of fleet sizes")->delimiter(',');
  cmd->add_option("--lambda", o.lambdas, "comma list of estimated throughputs")->delimiter(',');
  cmd->add_flag("--include-flagged", o.include_flagged, "keep deadlock-flagged trials in the summary");
}

ExperimentConfig resolve_config(const Overrides& o) {
  ExperimentConfig cfg = o.config.empty() ? parse_config("{}") : load_config(o.config);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.seed_base) cfg.seed_base = o.seed_base;
  if (o.trials) cfg.trials = o.trials;
  if (o.ticks) cfg.ticks = o.ticks;
  if (o.threads >= 0) cfg.threads = o.threads;
  if (!o.policies.empty()) {
    cfg.policies.clear();
    for (const std::string& p : o.policies) cfg.policies.push_back(parse_policy(p));
  }
  if (!o.robots.empty()) cfg.robots = o.robots;
  if (!o.lambdas.empty()) {
    cfg.lambdas = o.lambdas;
    cfg.demand_path.clear();
  }
  cfg.validate();
  return cfg;
}

std::string offline_dir(const ExperimentConfig& cfg) { return (fs::path(cfg.out_dir) / "offline").string(); }

std::string tag(const std::string& policy, int robots, double lambda) {
  return policy + "_R" + std::to_string(robots) + "_lambda" + io::format_double(lambda);
}

int cmd_solve(const Overrides& o) {
  ExperimentConfig cfg = resolve_config(o);
  Layout layout = load_layout(cfg);
  PipelineCache cache(offline_dir(cfg));
  for (double lambda : sweep_lambdas(cfg, layout)) {
    const std::string hash = offline_hash(cfg, layout, lambda);
    SolveResult s = cache.solve(cfg, layout, lambda);
    const double last_tc = s.trace.iterations.empty() ? s.trace.initial_tc : s.trace.iterations.back().tc;
    const double residual = s.trace.iterations.empty() ? 0.0 : s.trace.iterations.back().residual;
    std::printf("lambda=%s iterations=%zu tc %.6f -> %.6f residual=%.3g %s%s\n  %s\n", io::format_double(lambda).c_str(),
                s.trace.iterations.size(), s.trace.initial_tc, last_tc, residual,
                s.trace.converged ? "converged" : "NOT converged", s.trace.split_start ? " (split start)" : "",
                cache.artifact_dir(hash).c_str());
  }
  return kOk;
}

int cmd_decompose(const Overrides& o) {
  ExperimentConfig cfg = resolve_config(o);
  Layout layout = load_layout(cfg);
  PipelineCache cache(offline_dir(cfg));
  for (double lambda : sweep_lambdas(cfg, layout)) {
    auto p = cache.get(cfg, layout, lambda);
    LinkFlow back = recompose(p->net, p->paths);
    double err = 0;
    for (std::size_t a = 0; a < back.fwd.size(); ++a)
      err = std::max({err, std::abs(back.fwd[a] - p->solved.flow.fwd[a]), std::abs(back.bwd[a] - p->solved.flow.bwd[a])});
    int fwd = 0;
    for (const PathFlow& e : p->paths.entries) fwd += e.direction == Direction::Forward;
    std::printf("lambda=%s paths=%zu (forward %d, backward %zu) max recompose error %.3g\n  %s\n",
                io::format_double(lambda).c_str(), p->paths.entries.size(), fwd, p->paths.entries.size() - fwd, err,
                cache.artifact_dir(p->hash).c_str());
  }
  return kOk;
}

Report write_report(const std::vector<io::TrialRecord>& records, const std::string& out_dir, bool include_flagged) {
  Report rep = build_report(records, include_flagged);
  io::write_file(out_dir + "/report.csv", report_csv(rep));
  io::write_file(out_dir + "/report.txt", report_text(rep));
  std::string flagged;
  for (const io::TrialRecord& r : rep.flagged) flagged += io::to_json_line(r) + "\n";
  io::write_file(out_dir + "/flagged.jsonl", flagged);
  return rep;
}

int cmd_simulate(const Overrides& o) {
  ExperimentConfig cfg = resolve_config(o);
  Layout layout = load_layout(cfg);
  PipelineCache cache(offline_dir(cfg));
  const std::vector<TrialSpec> specs = trial_specs(cfg);
  std::vector<TrialOutcome> outcomes = run_trials(cfg, layout, cache, specs);

  const fs::path out(cfg.out_dir);
  io::write_file((out / "config.json").string(), config_json(cfg) + "\n");
  std::string all;
  std::map<std::string, std::pair<std::vector<long>, std::vector<long>>> heat;  // turns, visits
  for (const TrialOutcome& t : outcomes) {
    const std::string line = io::to_json_line(t.record) + "\n";
    all += line;
    const std::string name = tag(t.record.policy, t.record.robots, t.record.lambda);
    io::write_file((out / "metrics" / (name + "_trial" + std::to_string(t.record.trial) + ".jsonl")).string(), line);
    auto& [turns, visits] = heat[name];
    turns.resize(t.metrics.cell_turns.size());
    visits.resize(t.metrics.cell_visits.size());
    for (std::size_t c = 0; c < turns.size(); ++c) turns[c] += t.metrics.cell_turns[c];
    for (std::size_t c = 0; c < visits.size(); ++c) visits[c] += t.metrics.cell_visits[c];
  }
  io::write_file((out / "metrics.jsonl").string(), all);
  for (const auto& [name, hv] : heat) {
    io::write_file((out / "heatmaps" / (name + "_turns.csv")).string(), io::heatmap_csv(layout, hv.first));
    io::write_file((out / "heatmaps" / (name + "_visits.csv")).string(), io::heatmap_csv(layout, hv.second));
  }
  for (double lambda : sweep_lambdas(cfg, layout)) {
    auto p = cache.get(cfg, layout, lambda);
    io::write_file((out / "heatmaps" / ("turning_flow_lambda" + io::format_double(lambda) + ".csv")).string(),
                   io::heatmap_values_csv(layout, cell_turning_flow(p->net, p->solved.flow)));
  }

  std::vector<io::TrialRecord> records;
  for (const TrialOutcome& t : outcomes) records.push_back(t.record);
  std::fputs(report_text(write_report(records, cfg.out_dir, o.include_flagged)).c_str(), stdout);
  std::printf("%zu trials written to %s\n", outcomes.size(), cfg.out_dir.c_str());
  return kOk;
}

int cmd_report(const Overrides& o) {
  std::string out_dir = o.out;
  if (out_dir.empty()) out_dir = o.config.empty() ? "out" : load_config(o.config).out_dir;
  std::vector<std::string> inputs = o.inputs;
  if (inputs.empty()) inputs.push_back(out_dir + "/metrics.jsonl");
  std::vector<io::TrialRecord> records;
  for (const std::string& f : inputs) {
    try {
      for (io::TrialRecord& r : io::parse_metrics_jsonl(io::read_file(f))) records.push_back(std::move(r));
    } catch (const FormatError& e) {
      throw FormatError(f, e.line, e.what());
    }
  }
  std::fputs(report_text(write_report(records, out_dir, o.include_flagged)).c_str(), stdout);
  return kOk;
}

int cmd_validate(const Overrides& o) {
  Layout layout;
  if (!o.inputs.empty()) {
    layout = load_layout_file(o.inputs.front());
  } else {
    layout = load_layout(resolve_config(o));
  }
  // Building the network checks that every drop-off is reachable both ways.
  FlowNetwork net = build_flow_network(layout, Demand::uniform(std::max(1, layout.dropoff_count()), 0.0));
  check_drop_exits(StaticRouter(net, TimingParams{}));
  std::printf("layout ok: %dx%d, %d workstations, %d drop-offs, %d nodes, %d arcs\n", layout.rows(), layout.cols(),
              layout.workstation_count(), layout.dropoff_count(), net.node_count(), net.arc_count());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flow-guided assignment and path finding for robotic sorting systems"};
  app.require_subcommand(1);
  Overrides o;
  struct Verb {
    const char* name;
    const char* help;
    int (*run)(const Overrides&);
  };
  const Verb verbs[] = {
      {"solve", "solve the system-optimal flow; writes solution.csv and trace.csv", cmd_solve},
      {"decompose", "decompose the optimal flow into path flows; writes paths.csv", cmd_decompose},
      {"simulate", "run the trial battery; writes metrics, heatmaps and the report", cmd_simulate},
      {"report", "summarize metrics files (default <out>/metrics.jsonl)", cmd_report},
      {"validate-layout", "check a layout file (or the configured layout)", cmd_validate},
  };
  std::map<CLI::App*, int (*)(const Overrides&)> handlers;
  for (const Verb& v : verbs) {
    CLI::App* cmd = app.add_subcommand(v.name, v.help);
    add_common(cmd, o);
    if (std::string(v.name) == "report" || std::string(v.name) == "validate-layout")
      cmd->add_option("files", o.inputs, "input files");
    handlers[cmd] = v.run;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  try {
    for (auto& [cmd, run] : handlers)
      if (cmd->parsed()) return run(o);
  } catch (const InfeasibleDemand& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const DisconnectedCommodity& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const SaturatedWorkstation& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
