#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "json.hpp"
#include "jobshoplab/bench.hpp"
#include "jobshoplab/errors.hpp"

namespace jsl {

using nlohmann::json;

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

namespace {

struct Job {
  std::size_t instance;
  std::size_t policy;
  std::uint64_t seed;
};

struct Outcome {
  RunResult result;
  std::optional<BenchViolation> violation;
  std::exception_ptr error;
};

std::string trace_file_name(const RunResult& r) {
  std::string name = r.instance + "__" + r.policy + "__s" + std::to_string(r.seed) + ".json";
  for (char& c : name)
    if (c == '/' || c == '\\' || c == ' ') c = '_';
  return name;
}

Outcome run_one(const Environment& env, const std::string& policy, std::uint64_t seed, const BenchSpec& spec) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  auto pol = make_policy(policy, seed);
  EpisodeResult ep = run_episode(env, *pol, seed);
  out.result.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  out.result.instance = env.instance().name;
  out.result.policy = policy;
  out.result.seed = seed;
  out.result.objectives = ep.objectives;
  out.result.plugin_metrics = ep.plugin_metrics;

  const SimContext& ctx = env.context();
  ValidateOptions vo;
  vo.transport_active = ctx.transport_active();
  vo.buffer_limits = ctx.options().buffer_limits;
  auto violations = validate_trace(env.instance(), ep.state.trace.to_vector(), vo);
  const bool want_trace = spec.trace_dir || !violations.empty();
  std::string trace = want_trace ? trace_json(ctx, ep.state, {policy, seed}) : std::string();
  if (spec.trace_dir) {
    std::ofstream f(std::filesystem::path(*spec.trace_dir) / trace_file_name(out.result));
    if (!f) throw Error("cannot write trace into '" + *spec.trace_dir + "'");
    f << trace << '\n';
  }
  if (!violations.empty()) {
    out.violation.emplace("trace of " + out.result.instance + "/" + policy + "/seed " + std::to_string(seed) +
                              " failed validation: " + violations.front().kind + ": " + violations.front().detail,
                          std::move(trace), std::move(violations));
  }
  return out;
}

bool lb_is_valid(const Environment& env) {
  // Sampled durations can fall below nominal, so the nominal bound may not hold.
  const PluginChain* chain = env.context().plugins();
  if (!chain) return true;
  return std::none_of(chain->plugins().begin(), chain->plugins().end(),
                      [](const auto& p) { return p->kind() == "stochastic"; });
}

}  // namespace

BenchReport run_benchmark(const BenchSpec& spec) {
  if (spec.policies.empty()) throw ConfigError("benchmark needs at least one policy");
  if (spec.seeds.empty()) throw ConfigError("benchmark needs at least one seed");
  for (const auto& p : spec.policies) make_policy(p, 0);
  if (spec.trace_dir) std::filesystem::create_directories(*spec.trace_dir);

  EnvConfig cfg = spec.config;
  cfg.action = ActionMode::multidiscrete;
  std::vector<Environment> envs;
  envs.reserve(spec.instances.size());
  for (const auto& inst : spec.instances) envs.emplace_back(inst, cfg);

  std::vector<Job> jobs;
  for (std::size_t i = 0; i < spec.instances.size(); ++i)
    for (std::size_t p = 0; p < spec.policies.size(); ++p)
      for (auto seed : spec.seeds) jobs.push_back({i, p, seed});

  std::vector<Outcome> outcomes(jobs.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (std::size_t k = cursor++; k < jobs.size(); k = cursor++) {
      const Job& jb = jobs[k];
      try {
        outcomes[k] = run_one(envs[jb.instance], spec.policies[jb.policy], jb.seed, spec);
      } catch (...) {
        outcomes[k].error = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(spec.workers, 1)), 1, jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  BenchReport report;
  for (auto& o : outcomes) {
    if (o.error) std::rethrow_exception(o.error);
    if (o.violation) throw *o.violation;
    report.runs.push_back(std::move(o.result));
  }

  for (std::size_t i = 0; i < spec.instances.size(); ++i) {
    const Instance& inst = spec.instances[i];
    InstanceSummary is;
    is.instance = inst.name;
    is.lb_source = "none";
    if (auto it = spec.bounds.find(inst.name); it != spec.bounds.end()) {
      is.lower_bound = it->second;
      is.lb_source = "file";
    } else if (spec.exact_bounds && inst.total_operations() <= kExactOpLimit) {
      is.lower_bound = brute_force_optimal(inst).makespan;
      is.lb_source = "exact";
    }
    is.lb_valid = is.lower_bound.has_value() && lb_is_valid(envs[i]);

    std::map<std::string, double> means;
    for (const auto& policy : spec.policies) {
      std::vector<double> xs;
      for (const auto& r : report.runs)
        if (r.instance == inst.name && r.policy == policy) xs.push_back(static_cast<double>(r.objectives.makespan));
      PolicySummary ps;
      ps.instance = inst.name;
      ps.policy = policy;
      ps.runs = xs.size();
      ps.mean_makespan = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(std::max<std::size_t>(xs.size(), 1));
      ps.std_makespan = sample_std(xs);
      if (is.lb_valid && ps.mean_makespan > 0) ps.ratio = static_cast<double>(*is.lower_bound) / ps.mean_makespan;
      means[policy] = ps.mean_makespan;
      report.summaries.push_back(ps);
    }
    for (const auto& a : spec.policies)
      for (const auto& b : spec.policies)
        report.relative_improvement[inst.name][a][b] = means[b] > 0 ? 1.0 - means[a] / means[b] : 0.0;
    report.instances.push_back(std::move(is));
  }
  return report;
}

std::string report_json(const BenchReport& report, bool timing) {
  json doc;
  json runs = json::array();
  for (const auto& r : report.runs) {
    json x;
    x["instance"] = r.instance;
    x["policy"] = r.policy;
    x["seed"] = r.seed;
    json o;
    for (const auto& name : objective_names()) o[name] = r.objectives.get(name);
    x["objectives"] = std::move(o);
    x["plugin_metrics"] = r.plugin_metrics;
    if (timing) x["wall_ms"] = r.wall_ms;
    runs.push_back(std::move(x));
  }
  doc["runs"] = std::move(runs);

  json instances = json::array();
  for (const auto& i : report.instances) {
    json x;
    x["instance"] = i.instance;
    x["lower_bound"] = i.lower_bound ? json(*i.lower_bound) : json(nullptr);
    x["lb_source"] = i.lb_source;
    x["lb_valid"] = i.lb_valid;
    instances.push_back(std::move(x));
  }
  doc["instances"] = std::move(instances);

  json summaries = json::array();
  for (const auto& s : report.summaries) {
    json x;
    x["instance"] = s.instance;
    x["policy"] = s.policy;
    x["runs"] = s.runs;
    x["mean_makespan"] = s.mean_makespan;
    x["std_makespan"] = s.std_makespan;
    x["ratio"] = s.ratio ? json(*s.ratio) : json(nullptr);
    summaries.push_back(std::move(x));
  }
  doc["summaries"] = std::move(summaries);
  doc["relative_improvement"] = report.relative_improvement;
  return doc.dump(2);
}

}  // namespace jsl
