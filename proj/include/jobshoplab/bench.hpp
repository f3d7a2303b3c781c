#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jobshoplab/dispatch.hpp"
#include "jobshoplab/errors.hpp"

namespace jsl {

// ---- trace documents --------------------------------------------------------

/// A trace record with resources and jobs by name, as stored in trace JSON.
struct NamedRecord {
  Tick time = 0;
  std::string kind;
  std::string resource;
  std::optional<std::string> job;
  std::string via;
  double priority = 0;
  std::string origin;
  std::uint64_t batch = 0;
  bool derived = false;

  bool operator==(const NamedRecord&) const = default;
};

struct TraceDocument {
  std::vector<NamedRecord> records;
  std::optional<Tick> makespan;
  std::string instance;
};

std::vector<NamedRecord> name_records(const SimContext& ctx, const std::vector<TraceRecord>& records);
/// Inverse of name_records for the given instance. Throws Error on unknown names.
std::vector<TraceRecord> resolve_records(const SimContext& ctx, const std::vector<NamedRecord>& records);

struct TraceMeta {
  std::string policy;
  std::uint64_t seed = 0;
};

/// {records, summary, plugins, meta} JSON for a finished (or partial) episode.
std::string trace_json(const SimContext& ctx, const SimState& s, const TraceMeta& meta = {});
/// Accepts a full trace document or a bare record array. Throws Error on malformed input.
TraceDocument parse_trace_json(std::string_view text);

// ---- validation -------------------------------------------------------------

struct Violation {
  std::string kind;  // overlap | precedence | capacity | teleport | ordering
  std::string detail;

  bool operator==(const Violation&) const = default;
};

struct ValidateOptions {
  /// nullopt: transports count as active when the trace contains transport events.
  std::optional<bool> transport_active;
  bool buffer_limits = true;
};

/// Independent feasibility check of a trace; does not reuse the state machine.
std::vector<Violation> validate_trace(const Instance& inst, const std::vector<TraceRecord>& trace,
                                      const ValidateOptions& opts = {});
std::vector<Violation> validate_trace(const Instance& inst, const std::vector<NamedRecord>& trace,
                                      const ValidateOptions& opts = {});

// ---- exact solver -----------------------------------------------------------

struct ExactResult {
  Tick makespan = 0;
  std::vector<std::vector<Tick>> starts;           // per job, per op
  std::vector<std::vector<int>> machine_orders;    // per machine, job indices in processing order
  std::int64_t nodes = 0;
};

inline constexpr std::size_t kExactOpLimit = 16;

/// Branch and bound over active schedules of the classical reduction.
/// Throws SizeGuardError above kExactOpLimit operations unless forced.
ExactResult brute_force_optimal(const Instance& inst, bool force = false);

/// Violations of a classical schedule given as start times (overlap, precedence).
std::vector<Violation> schedule_violations(const Instance& inst, const std::vector<std::vector<Tick>>& starts);

// ---- instances and bounds ---------------------------------------------------

/// n x m classical instance; every job visits every machine once, durations uniform in [pmin, pmax].
Instance make_random_classical(int jobs, int machines, std::uint64_t seed, Tick pmin = 1, Tick pmax = 9);

/// Lines "<instance-name> <int-LB>", '#' comments. Throws Error on malformed lines.
std::map<std::string, Tick> parse_bounds(std::string_view text);

/// Parses by format name ("dsl" or "orlib"); "auto" sniffs the first statement.
Instance load_instance_text(std::string_view text, std::string_view format = "auto", std::string name = "");
Instance load_instance_file(const std::string& path, std::string_view format = "auto");

// ---- benchmark --------------------------------------------------------------

struct BenchSpec {
  std::vector<Instance> instances;
  std::vector<std::string> policies;
  EnvConfig config;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, Tick> bounds;
  int workers = 1;
  bool exact_bounds = true;  // brute force when no bound is given and the instance is small
  bool timing = false;       // include wall times (makes reports non-reproducible)
  std::optional<std::string> trace_dir;
};

struct RunResult {
  std::string instance;
  std::string policy;
  std::uint64_t seed = 0;
  ObjectiveVector objectives;
  PluginMetrics plugin_metrics;
  double wall_ms = 0;
};

struct InstanceSummary {
  std::string instance;
  std::optional<Tick> lower_bound;
  std::string lb_source;  // file | exact | none
  bool lb_valid = false;  // false when sampled durations may undercut the bound
};

struct PolicySummary {
  std::string instance;
  std::string policy;
  double mean_makespan = 0;
  double std_makespan = 0;
  std::optional<double> ratio;  // LB / mean makespan
  std::size_t runs = 0;
};

struct BenchReport {
  std::vector<RunResult> runs;
  std::vector<InstanceSummary> instances;
  std::vector<PolicySummary> summaries;
  /// (instance, policy A, policy B) -> 1 - C_A / C_B on mean makespans.
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> relative_improvement;
};

/// A trace failed validation during a benchmark. Carries the trace JSON.
class BenchViolation : public Error {
 public:
  BenchViolation(const std::string& msg, std::string trace, std::vector<Violation> v)
      : Error(msg), trace_(std::move(trace)), violations_(std::move(v)) {}
  const std::string& trace() const noexcept { return trace_; }
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::string trace_;
  std::vector<Violation> violations_;
};

BenchReport run_benchmark(const BenchSpec& spec);
std::string report_json(const BenchReport& report, bool timing = false);

double sample_std(const std::vector<double>& xs);

// ---- Gantt ------------------------------------------------------------------

/// {resources: [{id, intervals: [{job, op, start, end, kind}]}], makespan}.
std::string export_gantt(const std::vector<NamedRecord>& records);

}  // namespace jsl
