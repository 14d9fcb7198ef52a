// Python extension: layouts, the flow solver, decomposition, simulation and
// the experiment battery.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "rss/decompose.hpp"
#include "rss/delay.hpp"
#include "rss/errors.hpp"
#include "rss/experiment.hpp"
#include "rss/io.hpp"
#include "rss/layout.hpp"
#include "rss/network.hpp"
#include "rss/report.hpp"
#include "rss/sim.hpp"
#include "rss/solver.hpp"

namespace py = pybind11;
using namespace rss;

namespace {

LinkFlow to_flow(const FlowNetwork& net, const std::vector<double>& fwd, const std::vector<double>& bwd) {
  if (static_cast<int>(fwd.size()) != net.arc_count() || static_cast<int>(bwd.size()) != net.arc_count())
    throw py::value_error("flow vectors must have one entry per arc");
  LinkFlow f;
  f.fwd = fwd;
  f.bwd = bwd;
  return f;
}

py::dict record_dict(const io::TrialRecord& r) {
  py::dict d;
  d["config_hash"] = r.config_hash;
  d["policy"] = r.policy;
  d["robots"] = r.robots;
  d["lambda"] = r.lambda;
  d["trial"] = r.trial;
  d["seed"] = r.seed;
  d["ticks"] = r.ticks;
  d["throughput"] = r.throughput;
  d["drops"] = r.drops;
  d["drops_in_window"] = r.drops_in_window;
  d["deadlocks"] = r.deadlocks;
  d["reroutes"] = r.reroutes;
  d["flagged"] = r.flagged;
  d["mean_trip_ticks"] = r.mean_trip_ticks;
  d["safe"] = r.safety.ok();
  return d;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["throughput"] = m.throughput;
  d["drops"] = m.drops;
  d["drops_in_window"] = m.drops_in_window;
  d["ticks"] = m.ticks;
  d["deadlocks"] = m.deadlocks;
  d["reroutes"] = m.reroutes;
  d["flagged"] = m.flagged;
  d["mean_trip_ticks"] = m.mean_trip_ticks;
  d["cell_turns"] = m.cell_turns;
  d["cell_visits"] = m.cell_visits;
  d["arc_fwd"] = m.arc_fwd;
  d["arc_bwd"] = m.arc_bwd;
  d["safe"] = m.safety.ok();
  return d;
}

// Solved flow, decomposition and split table for one configuration and lambda.
struct PyPipeline {
  ExperimentConfig cfg;
  std::shared_ptr<const Pipeline> p;
};

}  // namespace

PYBIND11_MODULE(_rssflow, m) {
  m.doc() = "Flow-guided assignment and path finding for robotic sorting systems";

  py::register_exception<Error>(m, "RssError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InfeasibleDemand>(m, "InfeasibleDemand", PyExc_ValueError);
  py::register_exception<SaturatedWorkstation>(m, "SaturatedWorkstation", PyExc_ValueError);
  py::register_exception<DisconnectedCommodity>(m, "DisconnectedCommodity", PyExc_ValueError);

  py::class_<Layout>(m, "Layout")
      .def_static("parse", [](const std::string& text) { return parse_layout(text); })
      .def_static("load", &load_layout_file)
      .def_static("generate", &generate_standard_layout, py::arg("rows") = 19, py::arg("cols") = 20,
                  py::arg("workstations") = 2, py::arg("dropoffs") = 30, py::arg("seed") = 7)
      .def("to_text", [](const Layout& l) { return serialize_layout(l); })
      .def_property_readonly("rows", &Layout::rows)
      .def_property_readonly("cols", &Layout::cols)
      .def_property_readonly("workstations", &Layout::workstation_count)
      .def_property_readonly("dropoffs", &Layout::dropoff_count)
      .def("__eq__", [](const Layout& a, const Layout& b) { return a == b; })
      .def("__repr__", [](const Layout& l) {
        return "<Layout " + std::to_string(l.rows()) + "x" + std::to_string(l.cols()) + ", " +
               std::to_string(l.workstation_count()) + " workstations, " + std::to_string(l.dropoff_count()) +
               " drop-offs>";
      });

  py::class_<TimingParams>(m, "Timing")
      .def(py::init([](double t1, double t2, double t_load, double t_drop) {
             TimingParams t = TimingParams::deterministic(t1, t2, t_load, t_drop);
             t.validate();
             return t;
           }),
           py::arg("t1") = 1.0, py::arg("t2") = 4.0, py::arg("t_load") = 3.0, py::arg("t_drop") = 1.0)
      .def_readwrite("t1", &TimingParams::t1)
      .def_readwrite("t2", &TimingParams::t2)
      .def_readwrite("load_mean", &TimingParams::load_mean)
      .def_readwrite("load_m2", &TimingParams::load_m2)
      .def_readwrite("drop_mean", &TimingParams::drop_mean)
      .def_readwrite("drop_m2", &TimingParams::drop_m2);

  py::class_<FlowNetwork>(m, "Network")
      .def(py::init([](const Layout& layout, double lambda) {
             return build_flow_network(layout, Demand::uniform(layout.dropoff_count(), lambda));
           }),
           py::arg("layout"), py::arg("lambda_"))
      .def_static("with_demand",
                  [](const Layout& layout, std::vector<double> per_dropoff) {
                    Demand d;
                    d.per_dropoff = std::move(per_dropoff);
                    return build_flow_network(layout, d);
                  })
      .def_property_readonly("node_count", &FlowNetwork::node_count)
      .def_property_readonly("arc_count", &FlowNetwork::arc_count)
      .def("node_label", &FlowNetwork::node_label)
      .def("arcs", [](const FlowNetwork& net) {
        py::list out;
        for (const Arc& a : net.arcs())
          out.append(py::make_tuple(net.node_label(a.tail), net.node_label(a.head), arc_kind_name(a.kind)));
        return out;
      });

  m.def(
      "total_cost",
      [](const FlowNetwork& net, const std::vector<double>& fwd, const std::vector<double>& bwd,
         const TimingParams& timing) { return total_cost(net, to_flow(net, fwd, bwd), timing); },
      py::arg("net"), py::arg("fwd"), py::arg("bwd"), py::arg("timing") = TimingParams::deterministic(1, 4, 3, 1));
  m.def(
      "cost_gradient",
      [](const FlowNetwork& net, const std::vector<double>& fwd, const std::vector<double>& bwd,
         const TimingParams& timing) { return cost_gradient(net, to_flow(net, fwd, bwd), timing); },
      py::arg("net"), py::arg("fwd"), py::arg("bwd"), py::arg("timing") = TimingParams::deterministic(1, 4, 3, 1));

  m.def(
      "solve",
      [](const FlowNetwork& net, const TimingParams& timing, double epsilon_rel, int max_iter) {
        SolverConfig c;
        c.epsilon_rel = epsilon_rel;
        c.max_iter = max_iter;
        c.validate();
        SolveResult r;
        {
          py::gil_scoped_release release;
          r = frank_wolfe(net, timing, c);
        }
        py::dict d;
        d["fwd"] = r.flow.fwd;
        d["bwd"] = r.flow.bwd;
        d["initial_tc"] = r.trace.initial_tc;
        d["tc"] = r.trace.iterations.empty() ? r.trace.initial_tc : r.trace.iterations.back().tc;
        d["converged"] = r.trace.converged;
        d["iterations"] = r.trace.iterations.size();
        d["trace_csv"] = io::trace_csv(r.trace);
        d["solution_csv"] = io::solution_csv(net, r.flow);
        return d;
      },
      py::arg("net"), py::arg("timing") = TimingParams::deterministic(1, 4, 3, 1), py::arg("epsilon_rel") = 1e-6,
      py::arg("max_iter") = 200);

  m.def(
      "decompose",
      [](const FlowNetwork& net, const std::vector<double>& fwd, const std::vector<double>& bwd, std::uint64_t seed) {
        Rng rng = make_rng(seed, 0);
        PathFlowTable t = decompose_flow(net, to_flow(net, fwd, bwd), rng);
        py::list out;
        for (const PathFlow& e : t.entries) {
          std::vector<std::string> labels;
          for (int n : e.nodes) labels.push_back(net.node_label(n));
          py::dict d;
          d["direction"] = e.direction == Direction::Forward ? "forward" : "backward";
          d["dropoff"] = e.dropoff;
          d["workstation"] = e.workstation;
          d["intensity"] = e.intensity;
          d["nodes"] = labels;
          out.append(d);
        }
        return out;
      },
      py::arg("net"), py::arg("fwd"), py::arg("bwd"), py::arg("seed") = 1);

  py::class_<ExperimentConfig>(m, "Config")
      .def_static("parse", [](const std::string& text) { return parse_config(text); }, py::arg("json") = "{}")
      .def_static("load", &load_config)
      .def("to_json", [](const ExperimentConfig& c) { return config_json(c); })
      .def("hash", [](const ExperimentConfig& c) { return config_hash(c); })
      .def("layout", [](const ExperimentConfig& c) { return load_layout(c); })
      .def_readwrite("lambdas", &ExperimentConfig::lambdas)
      .def_readwrite("robots", &ExperimentConfig::robots)
      .def_readwrite("ticks", &ExperimentConfig::ticks)
      .def_readwrite("trials", &ExperimentConfig::trials)
      .def_readwrite("seed_base", &ExperimentConfig::seed_base)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_property(
          "policies",
          [](const ExperimentConfig& c) {
            std::vector<std::string> out;
            for (Policy p : c.policies) out.emplace_back(policy_name(p));
            return out;
          },
          [](ExperimentConfig& c, const std::vector<std::string>& names) {
            c.policies.clear();
            for (const std::string& n : names) c.policies.push_back(parse_policy(n));
          });

  py::class_<PyPipeline>(m, "Pipeline")
      .def(py::init([](const ExperimentConfig& cfg, double lambda) {
             cfg.validate();
             Layout layout = load_layout(cfg);
             py::gil_scoped_release release;
             return PyPipeline{cfg, build_pipeline(cfg, layout, lambda)};
           }),
           py::arg("config"), py::arg("lambda_"))
      .def_property_readonly("hash", [](const PyPipeline& p) { return p.p->hash; })
      .def_property_readonly("network", [](const PyPipeline& p) { return &p.p->net; }, py::return_value_policy::reference_internal)
      .def_property_readonly("fwd", [](const PyPipeline& p) { return p.p->solved.flow.fwd; })
      .def_property_readonly("bwd", [](const PyPipeline& p) { return p.p->solved.flow.bwd; })
      .def_property_readonly("path_count", [](const PyPipeline& p) { return p.p->paths.entries.size(); })
      .def("turning_flow", [](const PyPipeline& p) { return cell_turning_flow(p.p->net, p.p->solved.flow); })
      .def(
          "simulate",
          [](const PyPipeline& p, const std::string& policy, int robots, int ticks, std::uint64_t seed) {
            SimConfig sc;
            sc.policy = parse_policy(policy);
            sc.robots = robots;
            sc.ticks = ticks;
            sc.seed = seed;
            sc.warmup_fraction = p.cfg.warmup_fraction;
            sc.horizon = p.cfg.horizon;
            Metrics met;
            {
              py::gil_scoped_release release;
              met = simulate(p.p->net, &p.p->split, p.cfg.timing, sc);
            }
            return metrics_dict(met);
          },
          py::arg("policy") = "optimal", py::arg("robots") = 20, py::arg("ticks") = 3000, py::arg("seed") = 1);

  m.def(
      "run_battery",
      [](const ExperimentConfig& cfg) {
        cfg.validate();
        Layout layout = load_layout(cfg);
        std::vector<TrialOutcome> out;
        {
          py::gil_scoped_release release;
          PipelineCache cache;
          out = run_trials(cfg, layout, cache, trial_specs(cfg));
        }
        py::list records;
        for (const TrialOutcome& t : out) records.append(record_dict(t.record));
        return records;
      },
      py::arg("config"));

  m.def(
      "report",
      [](const std::vector<py::dict>& records, bool include_flagged) {
        std::vector<io::TrialRecord> rs;
        for (const py::dict& d : records) {
          io::TrialRecord r;
          r.policy = d["policy"].cast<std::string>();
          r.robots = d["robots"].cast<int>();
          r.lambda = d["lambda"].cast<double>();
          r.trial = d["trial"].cast<int>();
          r.throughput = d["throughput"].cast<double>();
          r.flagged = d.contains("flagged") && d["flagged"].cast<bool>();
          rs.push_back(std::move(r));
        }
        Report rep = build_report(rs, include_flagged);
        return py::make_tuple(report_text(rep), report_csv(rep));
      },
      py::arg("records"), py::arg("include_flagged") = false);

  m.def("spearman", &spearman);
}
