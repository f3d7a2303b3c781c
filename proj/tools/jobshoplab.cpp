#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "jobshoplab/bench.hpp"

namespace fs = std::filesystem;
using namespace jsl;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kViolation = 2;
constexpr int kGuard = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text << '\n';
}

EnvConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return parse_config_dsl(slurp(path));
}

/// "a..b", "a-b" or a comma list.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (s.empty() || used != s.size()) throw CLI::ValidationError("--seeds", "bad seed '" + s + "'");
    return static_cast<std::uint64_t>(v);
  };
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::size_t sep = part.find("..");
    std::size_t width = 2;
    if (sep == std::string::npos) {
      sep = part.find('-');
      width = 1;
    }
    if (sep == std::string::npos) {
      out.push_back(number(part));
      continue;
    }
    const auto lo = number(part.substr(0, sep));
    const auto hi = number(part.substr(sep + width));
    if (hi < lo) throw CLI::ValidationError("--seeds", "empty range '" + part + "'");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw CLI::ValidationError("--seeds", "no seeds given");
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ','))
    if (!part.empty()) out.push_back(part);
  return out;
}

bool instance_file(const fs::path& p) {
  const auto ext = p.extension().string();
  const auto stem = p.stem().string();
  return (ext == ".dsl" || ext == ".txt" || ext == ".jsp") && stem.rfind("bounds", 0) != 0;
}

std::vector<Instance> load_instances(const std::vector<std::string>& paths, const std::string& format) {
  std::vector<std::string> files;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && instance_file(e.path())) found.push_back(e.path().string());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  std::vector<Instance> out;
  for (const auto& f : files) out.push_back(load_instance_file(f, format));
  return out;
}

void print_violations(const std::vector<Violation>& v) {
  for (const auto& x : v) std::cerr << "violation: " << x.kind << ": " << x.detail << '\n';
}

struct RunArgs {
  std::string instance, format = "auto", policy = "spt", config, trace_out;
  std::uint64_t seed = 0;
};

int cmd_run(const RunArgs& a) {
  const Instance inst = load_instance_file(a.instance, a.format);
  EnvConfig cfg = load_config(a.config);
  Environment env(inst, cfg);
  auto policy = make_policy(a.policy, a.seed);
  EpisodeResult ep = run_episode(env, *policy, a.seed);
  const SimContext& ctx = env.context();
  const auto trace = trace_json(ctx, ep.state, {a.policy, a.seed});
  if (!a.trace_out.empty()) spit(a.trace_out, trace);

  std::cout << "instance " << inst.name << "  policy " << a.policy << "  seed " << a.seed << '\n';
  for (const auto& name : objective_names()) std::cout << "  " << name << " = " << ep.objectives.get(name) << '\n';
  for (const auto& [k, v] : ep.plugin_metrics) std::cout << "  " << k << " = " << v << '\n';

  auto violations = validate_trace(inst, ep.state.trace.to_vector(),
                                   {ctx.transport_active(), ctx.options().buffer_limits});
  if (!violations.empty()) {
    print_violations(violations);
    return kViolation;
  }
  return kOk;
}

struct BenchArgs {
  std::vector<std::string> instances;
  std::string format = "auto", policies = "spt,mwkr,random", config, seeds = "0", bounds, report, trace_dir;
  int workers = 1;
  bool timing = false, no_exact = false;
};

int cmd_bench(const BenchArgs& a) {
  BenchSpec spec;
  spec.instances = load_instances(a.instances, a.format);
  if (spec.instances.empty()) throw CLI::ValidationError("--instances", "no instance files found");
  spec.policies = split_list(a.policies);
  spec.config = load_config(a.config);
  spec.seeds = parse_seeds(a.seeds);
  if (!a.bounds.empty()) spec.bounds = parse_bounds(slurp(a.bounds));
  spec.workers = a.workers;
  spec.exact_bounds = !a.no_exact;
  spec.timing = a.timing;
  if (!a.trace_dir.empty()) spec.trace_dir = a.trace_dir;
  try {
    const BenchReport report = run_benchmark(spec);
    spit(a.report, report_json(report, a.timing));
    if (!a.report.empty()) {
      for (const auto& s : report.summaries) {
        std::cout << s.instance << "  " << s.policy << "  mean " << s.mean_makespan << "  std " << s.std_makespan;
        if (s.ratio) std::cout << "  LB/C " << *s.ratio;
        std::cout << '\n';
      }
    }
  } catch (const BenchViolation& v) {
    std::cerr << v.what() << '\n';
    print_violations(v.violations());
    const std::string where = a.trace_dir.empty() ? "violation_trace.json" : (fs::path(a.trace_dir) / "violation_trace.json").string();
    spit(where, v.trace());
    std::cerr << "offending trace written to " << where << '\n';
    return kViolation;
  }
  return kOk;
}

int cmd_validate(const std::string& instance, const std::string& format, const std::string& trace) {
  const Instance inst = load_instance_file(instance, format);
  const TraceDocument doc = parse_trace_json(slurp(trace));
  const auto violations = validate_trace(inst, doc.records);
  if (violations.empty()) {
    std::cout << "ok: " << doc.records.size() << " records, no violations\n";
    return kOk;
  }
  print_violations(violations);
  std::cout << violations.size() << " violation(s)\n";
  return kViolation;
}

int cmd_solve_exact(const std::string& instance, const std::string& format, bool force, const std::string& out) {
  const Instance inst = load_instance_file(instance, format);
  const ExactResult r = brute_force_optimal(inst, force);
  nlohmann::json doc;
  doc["instance"] = inst.name;
  doc["makespan"] = r.makespan;
  doc["nodes"] = r.nodes;
  nlohmann::json starts = nlohmann::json::object();
  for (std::size_t j = 0; j < inst.jobs.size(); ++j) starts[inst.jobs[j].id] = r.starts.empty() ? nlohmann::json::array() : nlohmann::json(r.starts[j]);
  doc["starts"] = std::move(starts);
  nlohmann::json orders = nlohmann::json::object();
  for (std::size_t m = 0; m < inst.machines.size() && m < r.machine_orders.size(); ++m) {
    nlohmann::json ids = nlohmann::json::array();
    for (int j : r.machine_orders[m]) ids.push_back(inst.jobs[static_cast<std::size_t>(j)].id);
    orders[inst.machines[m].id] = std::move(ids);
  }
  doc["machine_orders"] = std::move(orders);
  if (!out.empty()) spit(out, doc.dump(2));
  std::cout << "optimal makespan " << r.makespan << " (" << r.nodes << " nodes)\n";
  return kOk;
}

int cmd_gantt(const std::string& trace, const std::string& out) {
  const TraceDocument doc = parse_trace_json(slurp(trace));
  spit(out, export_gantt(doc.records));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Job shop simulation, dispatching benchmarks and schedule checking"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run one episode with a dispatching rule");
  run_cmd->add_option("--instance", run.instance, "Instance file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--format", run.format, "dsl, orlib or auto")->check(CLI::IsMember({"auto", "dsl", "orlib"}));
  run_cmd->add_option("--policy", run.policy, "spt, mwkr or random")->check(CLI::IsMember({"spt", "mwkr", "random"}));
  run_cmd->add_option("--config", run.config, "Environment config file")->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run.seed, "Episode seed");
  run_cmd->add_option("--trace-out", run.trace_out, "Write the trace JSON here");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run every instance x policy x seed and report");
  bench_cmd->add_option("--instances", bench.instances, "Instance files or directories")->required();
  bench_cmd->add_option("--format", bench.format, "dsl, orlib or auto")->check(CLI::IsMember({"auto", "dsl", "orlib"}));
  bench_cmd->add_option("--policies", bench.policies, "Comma-separated policy names");
  bench_cmd->add_option("--config", bench.config, "Environment config file")->check(CLI::ExistingFile);
  bench_cmd->add_option("--seeds", bench.seeds, "a..b, a-b or a,b,c");
  bench_cmd->add_option("--bounds", bench.bounds, "Lower-bound file")->check(CLI::ExistingFile);
  bench_cmd->add_option("--report", bench.report, "Report JSON path (stdout when omitted)");
  bench_cmd->add_option("--workers", bench.workers, "Parallel episodes")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--trace-dir", bench.trace_dir, "Write every episode trace into this directory");
  bench_cmd->add_flag("--timing", bench.timing, "Include wall times in the report");
  bench_cmd->add_flag("--no-exact", bench.no_exact, "Skip exact lower bounds for small instances");

  std::string v_instance, v_format = "auto", v_trace;
  auto* validate_cmd = app.add_subcommand("validate", "Check a trace against an instance");
  validate_cmd->add_option("--instance", v_instance, "Instance file")->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--format", v_format, "dsl, orlib or auto")->check(CLI::IsMember({"auto", "dsl", "orlib"}));
  validate_cmd->add_option("--trace", v_trace, "Trace JSON")->required()->check(CLI::ExistingFile);

  std::string e_instance, e_format = "auto", e_out;
  bool e_force = false;
  auto* exact_cmd = app.add_subcommand("solve-exact", "Optimal makespan of the classical reduction");
  exact_cmd->add_option("--instance", e_instance, "Instance file")->required()->check(CLI::ExistingFile);
  exact_cmd->add_option("--format", e_format, "dsl, orlib or auto")->check(CLI::IsMember({"auto", "dsl", "orlib"}));
  exact_cmd->add_flag("--force", e_force, "Ignore the size guard");
  exact_cmd->add_option("--out", e_out, "Write the witness schedule JSON here");

  std::string g_trace, g_out;
  auto* gantt_cmd = app.add_subcommand("gantt", "Convert a trace into Gantt intervals");
  gantt_cmd->add_option("--trace", g_trace, "Trace JSON")->required()->check(CLI::ExistingFile);
  gantt_cmd->add_option("--out", g_out, "Output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*bench_cmd) return cmd_bench(bench);
    if (*validate_cmd) return cmd_validate(v_instance, v_format, v_trace);
    if (*exact_cmd) return cmd_solve_exact(e_instance, e_format, e_force, e_out);
    if (*gantt_cmd) return cmd_gantt(g_trace, g_out);
  } catch (const SizeGuardError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kGuard;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
