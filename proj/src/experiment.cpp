#include "rss/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <numeric>
#include <set>
#include <thread>

#include "json.hpp"
#include "rss/errors.hpp"

namespace rss {

namespace {

using Json = nlohmann::ordered_json;

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base_dir) / path).lexically_normal().string();
}

// Reads `key` from `obj` into `out` when present; any type mismatch is a
// config error naming the key.
template <class T>
void take(const Json& obj, const char* section, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(section) + "." + key + " has the wrong type");
  }
}

void check_keys(const Json& obj, const char* section, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(section) + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown key " + std::string(section) + "." + it.key());
  }
}

const Json& section(const Json& root, const char* name) {
  static const Json empty = Json::object();
  auto it = root.find(name);
  return it == root.end() ? empty : *it;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!layout.path.empty()) {
    if (!std::filesystem::exists(layout.path)) throw ConfigError("layout file not found: " + layout.path);
  } else if (layout.rows <= 0 || layout.cols <= 0 || layout.workstations <= 0 || layout.dropoffs <= 0) {
    throw ConfigError("layout generator needs positive rows, cols, workstations and dropoffs");
  }
  timing.validate();
  solver.validate();
  if (!demand_path.empty() && !std::filesystem::exists(demand_path))
    throw ConfigError("demand file not found: " + demand_path);
  if (demand_path.empty() && lambdas.empty()) throw ConfigError("demand.lambda sweep is empty");
  for (double l : lambdas)
    if (!(l > 0.0)) throw ConfigError("demand.lambda values must be positive");
  if (policies.empty()) throw ConfigError("simulation.policies is empty");
  if (robots.empty()) throw ConfigError("simulation.robots sweep is empty");
  for (int r : robots)
    if (r < 0) throw ConfigError("simulation.robots values must be nonnegative");
  if (ticks <= 0) throw ConfigError("simulation.ticks must be positive");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) throw ConfigError("simulation.warmup_fraction must be in [0, 1)");
  if (horizon < 0) throw ConfigError("simulation.horizon must be nonnegative");
  if (trials <= 0) throw ConfigError("simulation.trials must be positive");
  if (threads < 0) throw ConfigError("simulation.threads must be nonnegative");
}

ExperimentConfig parse_config(std::string_view json_text, const std::string& base_dir) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, "config", {"layout", "timing", "demand", "solver", "decompose", "simulation", "output"});
  ExperimentConfig cfg;

  const Json& lay = section(root, "layout");
  check_keys(lay, "layout", {"file", "rows", "cols", "workstations", "dropoffs", "seed"});
  take(lay, "layout", "file", cfg.layout.path);
  cfg.layout.path = resolve(cfg.layout.path, base_dir);
  take(lay, "layout", "rows", cfg.layout.rows);
  take(lay, "layout", "cols", cfg.layout.cols);
  take(lay, "layout", "workstations", cfg.layout.workstations);
  take(lay, "layout", "dropoffs", cfg.layout.dropoffs);
  take(lay, "layout", "seed", cfg.layout.seed);

  const Json& tim = section(root, "timing");
  check_keys(tim, "timing", {"t1", "t2", "t_load", "t_drop", "t_load_m2", "t_drop_m2"});
  double t1 = 1, t2 = 4, tl = 3, td = 1;
  take(tim, "timing", "t1", t1);
  take(tim, "timing", "t2", t2);
  take(tim, "timing", "t_load", tl);
  take(tim, "timing", "t_drop", td);
  cfg.timing = TimingParams::deterministic(t1, t2, tl, td);
  take(tim, "timing", "t_load_m2", cfg.timing.load_m2);
  take(tim, "timing", "t_drop_m2", cfg.timing.drop_m2);

  const Json& dem = section(root, "demand");
  check_keys(dem, "demand", {"lambda", "file"});
  if (auto it = dem.find("lambda"); it != dem.end()) {
    if (it->is_number())
      cfg.lambdas = {it->get<double>()};
    else
      take(dem, "demand", "lambda", cfg.lambdas);
  }
  take(dem, "demand", "file", cfg.demand_path);
  cfg.demand_path = resolve(cfg.demand_path, base_dir);

  const Json& sol = section(root, "solver");
  check_keys(sol, "solver", {"epsilon_rel", "max_iter", "line_search_iters", "seed"});
  take(sol, "solver", "epsilon_rel", cfg.solver.epsilon_rel);
  take(sol, "solver", "max_iter", cfg.solver.max_iter);
  take(sol, "solver", "line_search_iters", cfg.solver.line_search_iters);
  take(sol, "solver", "seed", cfg.solver.seed);

  const Json& dec = section(root, "decompose");
  check_keys(dec, "decompose", {"seed"});
  take(dec, "decompose", "seed", cfg.decompose_seed);

  const Json& sim = section(root, "simulation");
  check_keys(sim, "simulation",
             {"policies", "robots", "ticks", "warmup_fraction", "horizon", "trials", "seed_base", "threads"});
  if (sim.contains("policies")) {
    std::vector<std::string> names;
    take(sim, "simulation", "policies", names);
    cfg.policies.clear();
    for (const std::string& n : names) cfg.policies.push_back(parse_policy(n));
  }
  if (auto it = sim.find("robots"); it != sim.end()) {
    if (it->is_number_integer())
      cfg.robots = {it->get<int>()};
    else
      take(sim, "simulation", "robots", cfg.robots);
  }
  take(sim, "simulation", "ticks", cfg.ticks);
  take(sim, "simulation", "warmup_fraction", cfg.warmup_fraction);
  take(sim, "simulation", "horizon", cfg.horizon);
  take(sim, "simulation", "trials", cfg.trials);
  take(sim, "simulation", "seed_base", cfg.seed_base);
  take(sim, "simulation", "threads", cfg.threads);

  const Json& out = section(root, "output");
  check_keys(out, "output", {"dir"});
  take(out, "output", "dir", cfg.out_dir);
  cfg.out_dir = resolve(cfg.out_dir, base_dir);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  const std::string base = std::filesystem::path(path).parent_path().string();
  return parse_config(io::read_file(path), base);
}

std::string config_json(const ExperimentConfig& cfg) {
  Json j;
  Json lay;
  if (!cfg.layout.path.empty()) {
    lay["file"] = cfg.layout.path;
  } else {
    lay["rows"] = cfg.layout.rows;
    lay["cols"] = cfg.layout.cols;
    lay["workstations"] = cfg.layout.workstations;
    lay["dropoffs"] = cfg.layout.dropoffs;
    lay["seed"] = cfg.layout.seed;
  }
  j["layout"] = lay;
  j["timing"] = {{"t1", cfg.timing.t1},           {"t2", cfg.timing.t2},
                 {"t_load", cfg.timing.load_mean}, {"t_drop", cfg.timing.drop_mean},
                 {"t_load_m2", cfg.timing.load_m2}, {"t_drop_m2", cfg.timing.drop_m2}};
  Json dem;
  if (!cfg.demand_path.empty())
    dem["file"] = cfg.demand_path;
  else
    dem["lambda"] = cfg.lambdas;
  j["demand"] = dem;
  j["solver"] = {{"epsilon_rel", cfg.solver.epsilon_rel},
                 {"max_iter", cfg.solver.max_iter},
                 {"line_search_iters", cfg.solver.line_search_iters},
                 {"seed", cfg.solver.seed}};
  j["decompose"] = {{"seed", cfg.decompose_seed}};
  std::vector<std::string> pols;
  for (Policy p : cfg.policies) pols.emplace_back(policy_name(p));
  j["simulation"] = {{"policies", pols},          {"robots", cfg.robots},
                     {"ticks", cfg.ticks},        {"warmup_fraction", cfg.warmup_fraction},
                     {"horizon", cfg.horizon},    {"trials", cfg.trials},
                     {"seed_base", cfg.seed_base}};
  return j.dump(2);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string config_hash(const ExperimentConfig& cfg) {
  // File contents, not paths, decide the hash.
  ExperimentConfig c = cfg;
  c.layout.path = c.layout.path.empty() ? "" : "layout";
  c.demand_path = c.demand_path.empty() ? "" : "demand";
  std::string text = config_json(c);
  if (!cfg.layout.path.empty()) text += io::read_file(cfg.layout.path);
  if (!cfg.demand_path.empty()) text += io::read_file(cfg.demand_path);
  return fnv1a_hex(text);
}

Layout load_layout(const ExperimentConfig& cfg) {
  if (!cfg.layout.path.empty()) return load_layout_file(cfg.layout.path);
  return generate_standard_layout(cfg.layout.rows, cfg.layout.cols, cfg.layout.workstations, cfg.layout.dropoffs,
                                  cfg.layout.seed);
}

Demand make_demand(const ExperimentConfig& cfg, const Layout& layout, double lambda) {
  if (!cfg.demand_path.empty()) return load_demand_file(cfg.demand_path, layout.dropoff_count());
  return Demand::uniform(layout.dropoff_count(), lambda);
}

std::vector<double> sweep_lambdas(const ExperimentConfig& cfg, const Layout& layout) {
  if (!cfg.demand_path.empty()) return {load_demand_file(cfg.demand_path, layout.dropoff_count()).total()};
  return cfg.lambdas;
}

std::string offline_hash(const ExperimentConfig& cfg, const Layout& layout, double lambda) {
  std::string text = serialize_layout(layout);
  for (double d : make_demand(cfg, layout, lambda).per_dropoff) text += io::format_double(d) + ",";
  const TimingParams& t = cfg.timing;
  for (double v : {t.t1, t.t2, t.load_mean, t.load_m2, t.drop_mean, t.drop_m2}) text += io::format_double(v) + ",";
  text += io::format_double(cfg.solver.epsilon_rel) + "," + std::to_string(cfg.solver.max_iter) + "," +
          std::to_string(cfg.solver.line_search_iters) + "," + std::to_string(cfg.solver.seed) + "," +
          std::to_string(cfg.decompose_seed);
  return fnv1a_hex(text);
}

std::shared_ptr<const Pipeline> build_pipeline(const ExperimentConfig& cfg, const Layout& layout, double lambda) {
  auto p = std::make_shared<Pipeline>();
  p->hash = offline_hash(cfg, layout, lambda);
  p->net = build_flow_network(layout, make_demand(cfg, layout, lambda));
  p->solved = frank_wolfe(p->net, cfg.timing, cfg.solver);
  Rng rng = make_rng(cfg.decompose_seed, 0);
  p->paths = decompose_flow(p->net, p->solved.flow, rng);
  p->split = build_split_table(p->net, p->paths);
  return p;
}

std::string PipelineCache::artifact_dir(const std::string& hash) const {
  return dir_.empty() ? std::string() : (std::filesystem::path(dir_) / hash).string();
}

SolveResult PipelineCache::solve(const ExperimentConfig& cfg, const Layout& layout, double lambda) {
  const FlowNetwork net = build_flow_network(layout, make_demand(cfg, layout, lambda));
  const std::string dir = artifact_dir(offline_hash(cfg, layout, lambda));
  const std::string sol = dir + "/solution.csv", trace = dir + "/trace.csv";
  if (!dir.empty() && std::filesystem::exists(sol) && std::filesystem::exists(trace))
    return {io::parse_solution_csv(net, io::read_file(sol)), io::parse_trace_csv(io::read_file(trace))};
  SolveResult solved = frank_wolfe(net, cfg.timing, cfg.solver);
  if (!dir.empty()) {
    io::write_file(dir + "/layout.txt", serialize_layout(layout));
    io::write_file(sol, io::solution_csv(net, solved.flow));
    io::write_file(trace, io::trace_csv(solved.trace));
  }
  return solved;
}

std::shared_ptr<const Pipeline> PipelineCache::get(const ExperimentConfig& cfg, const Layout& layout, double lambda) {
  const std::string key = offline_hash(cfg, layout, lambda);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
  }
  std::shared_ptr<Pipeline> p;
  if (dir_.empty()) {
    p = std::const_pointer_cast<Pipeline>(build_pipeline(cfg, layout, lambda));
  } else {
    p = std::make_shared<Pipeline>();
    p->hash = key;
    p->net = build_flow_network(layout, make_demand(cfg, layout, lambda));
    p->solved = solve(cfg, layout, lambda);
    const std::string paths = artifact_dir(key) + "/paths.csv";
    if (std::filesystem::exists(paths)) {
      p->paths = io::parse_path_flow_csv(p->net, io::read_file(paths));
    } else {
      Rng rng = make_rng(cfg.decompose_seed, 0);
      p->paths = decompose_flow(p->net, p->solved.flow, rng);
      io::write_file(paths, io::path_flow_csv(p->net, p->paths));
    }
    p->split = build_split_table(p->net, p->paths);
  }
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.emplace(key, std::move(p)).first->second;
}

std::size_t PipelineCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

std::vector<double> cell_turning_flow(const FlowNetwork& net, const LinkFlow& flow) {
  std::vector<double> out(static_cast<std::size_t>(net.layout().cell_count()), 0.0);
  for (int cell = 0; cell < net.layout().cell_count(); ++cell)
    for (int a : net.cell_arcs(cell).turns)
      out[static_cast<std::size_t>(cell)] += flow.fwd[static_cast<std::size_t>(a)] + flow.bwd[static_cast<std::size_t>(a)];
  return out;
}

std::vector<TrialSpec> trial_specs(const ExperimentConfig& cfg) {
  std::vector<TrialSpec> specs;
  const std::vector<double> lambdas = cfg.demand_path.empty() ? cfg.lambdas : std::vector<double>{0.0};
  for (double lambda : lambdas)
    for (Policy p : cfg.policies)
      for (int r : cfg.robots)
        for (int t = 0; t < cfg.trials; ++t) specs.push_back({p, r, lambda, t, trial_seed(cfg.seed_base, t)});
  return specs;
}

std::vector<TrialOutcome> run_trials(const ExperimentConfig& cfg, const Layout& layout, PipelineCache& cache,
                                     const std::vector<TrialSpec>& specs) {
  const std::string hash = config_hash(cfg);
  // Offline work first, so workers only read shared state.
  std::vector<double> wanted;
  for (const TrialSpec& s : specs)
    if (std::find(wanted.begin(), wanted.end(), s.lambda) == wanted.end()) wanted.push_back(s.lambda);
  std::map<double, std::shared_ptr<const Pipeline>> pipes;
  for (double l : wanted) pipes[l] = cache.get(cfg, layout, l);

  std::vector<TrialOutcome> out(specs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        const TrialSpec& s = specs[i];
        const Pipeline& pipe = *pipes.at(s.lambda);
        SimConfig sc;
        sc.policy = s.policy;
        sc.robots = s.robots;
        sc.ticks = cfg.ticks;
        sc.seed = s.seed;
        sc.warmup_fraction = cfg.warmup_fraction;
        sc.horizon = cfg.horizon;
        out[i].spec = s;
        out[i].metrics = simulate(pipe.net, &pipe.split, cfg.timing, sc);
        const double lambda = cfg.demand_path.empty() ? s.lambda : pipe.net.demand().total();
        out[i].record = io::make_record(out[i].metrics, hash, s.policy, s.robots, lambda, s.trial, s.seed);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned n = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(1, specs.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw ConfigError("spearman needs two samples of equal size >= 2");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (saa == 0 || sbb == 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace rss
