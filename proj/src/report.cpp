#include "rss/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "rss/errors.hpp"
#include "rss/random.hpp"

namespace rss {

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

using Key = std::tuple<double, int, std::string>;  // lambda, robots, policy

constexpr const char* kHeader =
    "policy,robots,lambda,flagged,n,max,q75,median,q25,min,mean,imp_n,imp_max,imp_q75,imp_median,imp_q25,imp_min,imp_mean";

void append_stats(std::string& out, const SummaryStats& s) {
  out += "," + std::to_string(s.n);
  for (double v : {s.max, s.q75, s.median, s.q25, s.min, s.mean}) out += "," + io::format_double(v);
}

}  // namespace

SummaryStats summarize(std::vector<double> values) {
  SummaryStats s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.n = static_cast<int>(values.size());
  s.min = values.front();
  s.max = values.back();
  s.q25 = quantile(values, 0.25);
  s.median = quantile(values, 0.5);
  s.q75 = quantile(values, 0.75);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return s;
}

Report build_report(const std::vector<io::TrialRecord>& records, bool include_flagged, std::uint64_t pairing_seed) {
  Report rep;
  std::map<Key, std::vector<const io::TrialRecord*>> kept;
  std::map<Key, int> flagged;
  for (const io::TrialRecord& r : records) {
    const Key k{r.lambda, r.robots, r.policy};
    kept[k];
    if (r.flagged) {
      ++flagged[k];
      rep.flagged.push_back(r);
      if (!include_flagged) continue;
    }
    kept[k].push_back(&r);
  }

  Rng rng = make_rng(pairing_seed, 0x9a);
  for (const auto& [key, trials] : kept) {
    const auto& [lambda, robots, policy] = key;
    GroupSummary g;
    g.policy = policy;
    g.robots = robots;
    g.lambda = lambda;
    g.flagged = flagged[key];
    std::vector<double> tp;
    for (const io::TrialRecord* r : trials) tp.push_back(r->throughput);
    g.throughput = summarize(tp);
    const std::string label = policy + " R=" + std::to_string(robots) + " lambda=" + io::format_double(lambda);
    if (trials.empty()) rep.warnings.push_back("empty group " + label + " (all trials flagged)");

    if (policy != "ra" && !trials.empty()) {
      auto base = kept.find(Key{lambda, robots, "ra"});
      std::vector<double> ra;
      if (base != kept.end())
        for (const io::TrialRecord* r : base->second)
          if (r->throughput > 0) ra.push_back(r->throughput);
      if (ra.empty()) {
        rep.warnings.push_back("no RA trials to pair with " + label);
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, ra.size() - 1);
        std::vector<double> imp;
        for (const io::TrialRecord* r : trials) imp.push_back(100.0 * (r->throughput / ra[pick(rng)] - 1.0));
        g.improvement = summarize(imp);
      }
    }
    rep.groups.push_back(std::move(g));
  }
  return rep;
}

std::string report_csv(const Report& report) {
  std::string out = std::string(kHeader) + "\n";
  for (const GroupSummary& g : report.groups) {
    out += g.policy + "," + std::to_string(g.robots) + "," + io::format_double(g.lambda) + "," +
           std::to_string(g.flagged);
    append_stats(out, g.throughput);
    append_stats(out, g.improvement);
    out += "\n";
  }
  return out;
}

std::vector<GroupSummary> parse_report_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int ln = 1;
  if (!std::getline(in, line) || line != kHeader) throw FormatError("report", 1, "unexpected header");
  std::vector<GroupSummary> out;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 18) throw FormatError("report", ln, "expected 18 fields");
    try {
      GroupSummary g;
      g.policy = f[0];
      g.robots = std::stoi(f[1]);
      g.lambda = io::parse_double(f[2]);
      g.flagged = std::stoi(f[3]);
      auto stats = [&](std::size_t at) {
        SummaryStats s;
        s.n = std::stoi(f[at]);
        double* slots[] = {&s.max, &s.q75, &s.median, &s.q25, &s.min, &s.mean};
        for (std::size_t k = 0; k < 6; ++k) *slots[k] = io::parse_double(f[at + 1 + k]);
        return s;
      };
      g.throughput = stats(4);
      g.improvement = stats(11);
      out.push_back(std::move(g));
    } catch (const std::exception& e) {
      throw FormatError("report", ln, e.what());
    }
  }
  return out;
}

std::string report_text(const Report& report) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-8s %4s %7s %4s %4s %7s %7s %7s %7s %7s %7s %8s\n", "policy", "R", "lambda", "n",
                "flag", "max", "q75", "median", "q25", "min", "mean", "impr%");
  out += buf;
  for (const GroupSummary& g : report.groups) {
    const SummaryStats& s = g.throughput;
    char imp[32] = "-";
    if (g.improvement.n > 0) std::snprintf(imp, sizeof imp, "%.2f", g.improvement.mean);
    std::snprintf(buf, sizeof buf, "%-8s %4d %7.3f %4d %4d %7.4f %7.4f %7.4f %7.4f %7.4f %7.4f %8s\n", g.policy.c_str(),
                  g.robots, g.lambda, s.n, g.flagged, s.max, s.q75, s.median, s.q25, s.min, s.mean, imp);
    out += buf;
  }
  if (!report.flagged.empty()) {
    out += "\nflagged trials (outliers):\n";
    for (const io::TrialRecord& r : report.flagged) {
      std::snprintf(buf, sizeof buf, "  %-8s R=%d lambda=%.3f trial=%d seed=%llu throughput=%.4f deadlocks=%d\n",
                    r.policy.c_str(), r.robots, r.lambda, r.trial, static_cast<unsigned long long>(r.seed),
                    r.throughput, r.deadlocks);
      out += buf;
    }
  }
  for (const std::string& w : report.warnings) out += "warning: " + w + "\n";
  return out;
}

}  // namespace rss
