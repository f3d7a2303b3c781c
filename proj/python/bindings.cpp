#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jobshoplab/bench.hpp"

namespace py = pybind11;
using namespace jsl;

namespace {

py::dict objectives_dict(const ObjectiveVector& o) {
  py::dict d;
  for (const auto& name : objective_names()) d[py::str(name)] = o.get(name);
  d["makespan"] = o.makespan;
  d["max_lateness"] = o.max_lateness;
  return d;
}

Action to_action(const Environment& env, const py::object& a) {
  if (env.config().action == ActionMode::binary) return BinaryAction{py::cast<bool>(a)};
  return MultiDiscreteAction{py::cast<std::vector<int>>(a)};
}

}  // namespace

PYBIND11_MODULE(_jobshoplab, m) {
  m.doc() = "Discrete-event job shop simulator";

  auto base = py::register_exception<Error>(m, "JobShopError");
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<SizeGuardError>(m, "SizeGuardError", base);

  py::class_<Instance>(m, "Instance")
      .def_property_readonly("name", [](const Instance& i) { return i.name; })
      .def_property_readonly("num_jobs", [](const Instance& i) { return i.jobs.size(); })
      .def_property_readonly("num_machines", [](const Instance& i) { return i.machines.size(); })
      .def_property_readonly("num_operations", &Instance::total_operations)
      .def_property_readonly("classification", [](const Instance& i) { return i.classification.to_string(); })
      .def("to_dsl", [](const Instance& i) { return to_dsl(i); })
      .def("validate", [](const Instance& i) { return validate_instance(i); });

  m.def("load_instance", &load_instance_text, py::arg("text"), py::arg("format") = "auto", py::arg("name") = "",
        "Parses DSL or OR-Library text.");
  m.def("load_instance_file", &load_instance_file, py::arg("path"), py::arg("format") = "auto");
  m.def("random_instance", &make_random_classical, py::arg("jobs"), py::arg("machines"), py::arg("seed"),
        py::arg("pmin") = 1, py::arg("pmax") = 9);
  m.def("classical_reduction", &classical_reduction);

  py::class_<SimState>(m, "State")
      .def_property_readonly("now", [](const SimState& s) { return s.now; })
      .def_property_readonly("terminal", [](const SimState& s) { return is_terminal(s); })
      .def("__eq__", [](const SimState& a, const SimState& b) { return a == b; });

  py::class_<Environment>(m, "Environment")
      .def(py::init([](const Instance& inst, const std::string& config) { return Environment(inst, parse_config_dsl(config)); }),
           py::arg("instance"), py::arg("config") = "")
      .def("reset",
           [](const Environment& env, std::optional<std::uint64_t> seed) {
             auto [s, obs] = env.reset(seed);
             return py::make_tuple(s, std::vector<double>(obs.begin(), obs.end()));
           },
           py::arg("seed") = py::none())
      .def("step",
           [](const Environment& env, const SimState& s, const py::object& a) {
             const StepResult r = env.step(s, to_action(env, a));
             py::dict info;
             info["invalid_action"] = r.info.invalid_action;
             info["invalid_reasons"] = r.info.invalid_reasons;
             info["time_advanced"] = r.info.time_advanced;
             if (r.info.objectives) info["objectives"] = objectives_dict(*r.info.objectives);
             if (r.done) info["plugin_metrics"] = r.info.plugin_metrics;
             return py::make_tuple(r.state, std::vector<double>(r.observation.begin(), r.observation.end()), r.reward, r.done,
                                   info);
           })
      .def("action_space", &Environment::action_space)
      .def("horizon_bound", [](const Environment& env) { return env.context().horizon_bound(); })
      .def("trace_json",
           [](const Environment& env, const SimState& s, const std::string& policy, std::uint64_t seed) {
             return trace_json(env.context(), s, TraceMeta{policy, seed});
           },
           py::arg("state"), py::arg("policy") = "", py::arg("seed") = 0);

  m.def(
      "run_episode",
      [](const Instance& inst, const std::string& config, const std::string& policy, std::uint64_t seed) {
        const Environment env(inst, parse_config_dsl(config));
        const EpisodeResult r = run_episode(env, *make_policy(policy, seed), seed);
        py::dict d;
        d["objectives"] = objectives_dict(r.objectives);
        d["plugin_metrics"] = r.plugin_metrics;
        d["steps"] = r.steps;
        d["total_reward"] = r.total_reward;
        d["trace"] = trace_json(env.context(), r.state, TraceMeta{policy, seed});
        return d;
      },
      py::arg("instance"), py::arg("config") = "action multidiscrete", py::arg("policy") = "spt", py::arg("seed") = 0,
      "Runs one dispatch-rule episode; returns objectives and the trace document as JSON text.");

  m.def(
      "validate_trace",
      [](const Instance& inst, const std::string& trace) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& v : validate_trace(inst, parse_trace_json(trace).records, {})) out.emplace_back(v.kind, v.detail);
        return out;
      },
      py::arg("instance"), py::arg("trace"));

  m.def(
      "solve_exact",
      [](const Instance& inst, bool force) {
        const ExactResult r = brute_force_optimal(inst, force);
        py::dict d;
        d["makespan"] = r.makespan;
        d["starts"] = r.starts;
        d["machine_orders"] = r.machine_orders;
        d["nodes"] = r.nodes;
        return d;
      },
      py::arg("instance"), py::arg("force") = false);

  m.def(
      "benchmark",
      [](const std::vector<Instance>& instances, const std::vector<std::string>& policies, const std::string& config,
         const std::vector<std::uint64_t>& seeds, const std::map<std::string, Tick>& bounds, int workers) {
        BenchSpec spec;
        spec.instances = instances;
        spec.policies = policies;
        spec.config = parse_config_dsl(config);
        spec.seeds = seeds;
        spec.bounds = bounds;
        spec.workers = workers;
        py::gil_scoped_release release;
        return report_json(run_benchmark(spec));
      },
      py::arg("instances"), py::arg("policies"), py::arg("config") = "action multidiscrete",
      py::arg("seeds") = std::vector<std::uint64_t>{0}, py::arg("bounds") = std::map<std::string, Tick>{},
      py::arg("workers") = 1, "Returns the report as JSON text.");

  m.def(
      "gantt",
      [](const std::string& trace) { return export_gantt(parse_trace_json(trace).records); }, py::arg("trace"));
}
