#include "rss/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "rss/errors.hpp"

namespace rss::io {

namespace {

using Json = nlohmann::ordered_json;

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

// Comma-separated fields; a field may be wrapped in double quotes (no
// escaped quotes are ever written).
std::vector<std::string> split_csv(std::string_view line, const char* file, int lineno) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) throw FormatError(file, lineno, "unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

template <class Int>
Int parse_int(std::string_view s, const char* file, int lineno) {
  Int v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw FormatError(file, lineno, "bad integer '" + std::string(s) + "'");
  return v;
}

double parse_field(std::string_view s, const char* file, int lineno) {
  try {
    return parse_double(s);
  } catch (const Error&) {
    throw FormatError(file, lineno, "bad number '" + std::string(s) + "'");
  }
}

void expect_header(const std::vector<std::string_view>& lines, std::size_t at, std::string_view header, const char* file) {
  if (lines.size() <= at || lines[at] != header)
    throw FormatError(file, static_cast<int>(at) + 1, "expected header '" + std::string(header) + "'");
}

std::map<std::string, int> label_index(const FlowNetwork& net) {
  std::map<std::string, int> m;
  for (int n = 0; n < net.node_count(); ++n) m.emplace(net.node_label(n), n);
  return m;
}

const char* direction_name(Direction d) { return d == Direction::Forward ? "forward" : "backward"; }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double parse_double(std::string_view text) {
  double v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || text.empty())
    throw ConfigError("not a number: '" + std::string(text) + "'");
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ConfigError("write failed for " + path);
  }
  std::filesystem::rename(tmp, target);
}

// ---- solution -------------------------------------------------------------

std::string solution_csv(const FlowNetwork& net, const LinkFlow& flow) {
  std::string out = "arc_id,tail,head,kind,flow_fwd,flow_bwd\n";
  for (int a = 0; a < net.arc_count(); ++a) {
    const Arc& arc = net.arcs()[static_cast<std::size_t>(a)];
    out += std::to_string(a) + "," + net.node_label(arc.tail) + "," + net.node_label(arc.head) + "," +
           arc_kind_name(arc.kind) + "," + format_double(flow.fwd[static_cast<std::size_t>(a)]) + "," +
           format_double(flow.bwd[static_cast<std::size_t>(a)]) + "\n";
  }
  return out;
}

LinkFlow parse_solution_csv(const FlowNetwork& net, std::string_view text) {
  const char* file = "solution";
  auto lines = lines_of(text);
  expect_header(lines, 0, "arc_id,tail,head,kind,flow_fwd,flow_bwd", file);
  LinkFlow flow(net.arc_count());
  std::vector<char> seen(static_cast<std::size_t>(net.arc_count()), 0);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const int ln = static_cast<int>(i) + 1;
    auto f = split_csv(lines[i], file, ln);
    if (f.size() != 6) throw FormatError(file, ln, "expected 6 fields");
    const int a = parse_int<int>(f[0], file, ln);
    if (a < 0 || a >= net.arc_count()) throw FormatError(file, ln, "arc id out of range");
    const Arc& arc = net.arcs()[static_cast<std::size_t>(a)];
    if (f[1] != net.node_label(arc.tail) || f[2] != net.node_label(arc.head) || f[3] != arc_kind_name(arc.kind))
      throw FormatError(file, ln, "arc " + f[0] + " does not match the network");
    if (seen[static_cast<std::size_t>(a)]++) throw FormatError(file, ln, "duplicate arc " + f[0]);
    flow.fwd[static_cast<std::size_t>(a)] = parse_field(f[4], file, ln);
    flow.bwd[static_cast<std::size_t>(a)] = parse_field(f[5], file, ln);
  }
  for (int a = 0; a < net.arc_count(); ++a)
    if (!seen[static_cast<std::size_t>(a)]) throw FormatError(file, 0, "arc " + std::to_string(a) + " missing");
  return flow;
}

// ---- trace ------------------------------------------------------------------

std::string trace_csv(const SolveTrace& t) {
  std::string out = "# initial_tc=" + format_double(t.initial_tc) + ",converged=" + std::to_string(t.converged) +
                    ",hit_max_iter=" + std::to_string(t.hit_max_iter) +
                    ",clamped_negative_cost=" + std::to_string(t.clamped_negative_cost) +
                    ",split_start=" + std::to_string(t.split_start) + "\n";
  out += "iter,tc,tc_linear,alpha,residual\n";
  for (const IterationRecord& r : t.iterations)
    out += std::to_string(r.iter) + "," + format_double(r.tc) + "," + format_double(r.tc_linear) + "," +
           format_double(r.alpha) + "," + format_double(r.residual) + "\n";
  return out;
}

SolveTrace parse_trace_csv(std::string_view text) {
  const char* file = "trace";
  auto lines = lines_of(text);
  if (lines.empty() || !lines[0].starts_with("# ")) throw FormatError(file, 1, "missing summary line");
  SolveTrace t;
  for (const std::string& kv : split_csv(lines[0].substr(2), file, 1)) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw FormatError(file, 1, "bad summary entry '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    if (key == "initial_tc")
      t.initial_tc = parse_field(val, file, 1);
    else if (key == "converged")
      t.converged = val == "1";
    else if (key == "hit_max_iter")
      t.hit_max_iter = val == "1";
    else if (key == "clamped_negative_cost")
      t.clamped_negative_cost = val == "1";
    else if (key == "split_start")
      t.split_start = val == "1";
    else
      throw FormatError(file, 1, "unknown summary key '" + key + "'");
  }
  expect_header(lines, 1, "iter,tc,tc_linear,alpha,residual", file);
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const int ln = static_cast<int>(i) + 1;
    auto f = split_csv(lines[i], file, ln);
    if (f.size() != 5) throw FormatError(file, ln, "expected 5 fields");
    t.iterations.push_back({parse_int<int>(f[0], file, ln), parse_field(f[1], file, ln), parse_field(f[2], file, ln),
                            parse_field(f[3], file, ln), parse_field(f[4], file, ln)});
  }
  return t;
}

// ---- path flows ---------------------------------------------------------------

std::string path_flow_csv(const FlowNetwork& net, const PathFlowTable& table) {
  std::string out = "direction,dropoff,workstation,intensity,nodes\n";
  for (const PathFlow& p : table.entries) {
    out += std::string(direction_name(p.direction)) + "," + std::to_string(p.dropoff) + "," +
           std::to_string(p.workstation) + "," + format_double(p.intensity) + ",\"";
    for (std::size_t i = 0; i < p.nodes.size(); ++i) {
      if (i) out += ' ';
      out += net.node_label(p.nodes[i]);
    }
    out += "\"\n";
  }
  return out;
}

PathFlowTable parse_path_flow_csv(const FlowNetwork& net, std::string_view text) {
  const char* file = "path flows";
  auto lines = lines_of(text);
  expect_header(lines, 0, "direction,dropoff,workstation,intensity,nodes", file);
  const auto labels = label_index(net);
  PathFlowTable table;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const int ln = static_cast<int>(i) + 1;
    auto f = split_csv(lines[i], file, ln);
    if (f.size() != 5) throw FormatError(file, ln, "expected 5 fields");
    PathFlow p;
    if (f[0] == "forward")
      p.direction = Direction::Forward;
    else if (f[0] == "backward")
      p.direction = Direction::Backward;
    else
      throw FormatError(file, ln, "bad direction '" + f[0] + "'");
    p.dropoff = parse_int<int>(f[1], file, ln);
    p.workstation = parse_int<int>(f[2], file, ln);
    p.intensity = parse_field(f[3], file, ln);
    std::istringstream ss(f[4]);
    std::string label;
    while (ss >> label) {
      auto it = labels.find(label);
      if (it == labels.end()) throw FormatError(file, ln, "unknown node '" + label + "'");
      p.nodes.push_back(it->second);
    }
    for (std::size_t k = 1; k < p.nodes.size(); ++k)
      if (net.find_arc(p.nodes[k - 1], p.nodes[k]) < 0)
        throw FormatError(file, ln, "no arc " + net.node_label(p.nodes[k - 1]) + " -> " + net.node_label(p.nodes[k]));
    if (p.dropoff < 1 || p.dropoff > net.layout().dropoff_count() || p.workstation < 1 ||
        p.workstation > net.layout().workstation_count() || p.nodes.size() < 4)
      throw FormatError(file, ln, "inconsistent path record");
    table.entries.push_back(std::move(p));
  }
  return table;
}

// ---- heatmaps -------------------------------------------------------------------

namespace {

template <class T, class Fmt>
std::string matrix_csv(const Layout& layout, const std::vector<T>& per_cell, Fmt fmt) {
  if (static_cast<int>(per_cell.size()) != layout.cell_count()) throw ConfigError("heatmap size does not match layout");
  std::string out;
  for (int r = 0; r < layout.rows(); ++r) {
    for (int c = 0; c < layout.cols(); ++c) {
      if (c) out += ',';
      out += fmt(per_cell[static_cast<std::size_t>(layout.index(r, c))]);
    }
    out += '\n';
  }
  return out;
}

template <class T, class Parse>
std::vector<T> parse_matrix_csv(const Layout& layout, std::string_view text, Parse parse) {
  const char* file = "heatmap";
  auto lines = lines_of(text);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (static_cast<int>(lines.size()) != layout.rows()) throw FormatError(file, 0, "row count does not match layout");
  std::vector<T> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int ln = static_cast<int>(i) + 1;
    auto f = split_csv(lines[i], file, ln);
    if (static_cast<int>(f.size()) != layout.cols()) throw FormatError(file, ln, "column count does not match layout");
    for (const std::string& x : f) out.push_back(parse(x, file, ln));
  }
  return out;
}

}  // namespace

std::string heatmap_csv(const Layout& layout, const std::vector<long>& per_cell) {
  return matrix_csv(layout, per_cell, [](long v) { return std::to_string(v); });
}

std::vector<long> parse_heatmap_csv(const Layout& layout, std::string_view text) {
  return parse_matrix_csv<long>(layout, text, parse_int<long>);
}

std::string heatmap_values_csv(const Layout& layout, const std::vector<double>& per_cell) {
  return matrix_csv(layout, per_cell, format_double);
}

std::vector<double> parse_heatmap_values_csv(const Layout& layout, std::string_view text) {
  return parse_matrix_csv<double>(layout, text, parse_field);
}

// ---- trial records ----------------------------------------------------------------

bool TrialRecord::operator==(const TrialRecord& o) const {
  return config_hash == o.config_hash && policy == o.policy && robots == o.robots && lambda == o.lambda &&
         trial == o.trial && seed == o.seed && ticks == o.ticks && throughput == o.throughput && drops == o.drops &&
         drops_in_window == o.drops_in_window && deadlocks == o.deadlocks && reroutes == o.reroutes &&
         flagged == o.flagged && mean_trip_ticks == o.mean_trip_ticks &&
         safety.occupancy_violations == o.safety.occupancy_violations &&
         safety.non_adjacent_moves == o.safety.non_adjacent_moves &&
         safety.duration_violations == o.safety.duration_violations &&
         safety.reservation_violations == o.safety.reservation_violations;
}

TrialRecord make_record(const Metrics& m, std::string config_hash, Policy policy, int robots, double lambda, int trial,
                        std::uint64_t seed) {
  TrialRecord r;
  r.config_hash = std::move(config_hash);
  r.policy = policy_name(policy);
  r.robots = robots;
  r.lambda = lambda;
  r.trial = trial;
  r.seed = seed;
  r.ticks = m.ticks;
  r.throughput = m.throughput;
  r.drops = m.drops;
  r.drops_in_window = m.drops_in_window;
  r.deadlocks = m.deadlocks;
  r.reroutes = m.reroutes;
  r.flagged = m.flagged;
  r.mean_trip_ticks = m.mean_trip_ticks;
  r.safety = m.safety;
  return r;
}

std::string to_json_line(const TrialRecord& r) {
  Json j;
  j["config_hash"] = r.config_hash;
  j["policy"] = r.policy;
  j["robots"] = r.robots;
  j["lambda"] = r.lambda;
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["ticks"] = r.ticks;
  j["throughput"] = r.throughput;
  j["drops"] = r.drops;
  j["drops_in_window"] = r.drops_in_window;
  j["deadlocks"] = r.deadlocks;
  j["reroutes"] = r.reroutes;
  j["flagged"] = r.flagged;
  j["mean_trip_ticks"] = r.mean_trip_ticks;
  j["safety"] = {{"occupancy", r.safety.occupancy_violations},
                 {"non_adjacent", r.safety.non_adjacent_moves},
                 {"duration", r.safety.duration_violations},
                 {"reservation", r.safety.reservation_violations}};
  return j.dump();
}

namespace {

TrialRecord record_from_json(std::string_view line, int lineno) {
  try {
    const Json j = Json::parse(line);
    TrialRecord r;
    r.config_hash = j.at("config_hash").get<std::string>();
    r.policy = j.at("policy").get<std::string>();
    r.robots = j.at("robots").get<int>();
    r.lambda = j.at("lambda").get<double>();
    r.trial = j.at("trial").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.ticks = j.at("ticks").get<int>();
    r.throughput = j.at("throughput").get<double>();
    r.drops = j.at("drops").get<long>();
    r.drops_in_window = j.value("drops_in_window", 0L);
    r.deadlocks = j.at("deadlocks").get<int>();
    r.reroutes = j.value("reroutes", 0);
    r.flagged = j.at("flagged").get<bool>();
    r.mean_trip_ticks = j.value("mean_trip_ticks", 0.0);
    if (j.contains("safety")) {
      const Json& s = j.at("safety");
      r.safety.occupancy_violations = s.value("occupancy", 0L);
      r.safety.non_adjacent_moves = s.value("non_adjacent", 0L);
      r.safety.duration_violations = s.value("duration", 0L);
      r.safety.reservation_violations = s.value("reservation", 0L);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("metrics", lineno, e.what());
  }
}

}  // namespace

TrialRecord parse_json_line(std::string_view line) { return record_from_json(line, 1); }

std::vector<TrialRecord> parse_metrics_jsonl(std::string_view text) {
  std::vector<TrialRecord> out;
  int ln = 0;
  for (std::string_view line : lines_of(text)) {
    ++ln;
    if (line.empty()) continue;
    out.push_back(record_from_json(line, ln));
  }
  return out;
}

}  // namespace rss::io
