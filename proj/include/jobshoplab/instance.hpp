#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace jsl {

/// Simulation time in discrete ticks.
using Tick = std::int64_t;

inline constexpr std::string_view kSource = "SOURCE";
inline constexpr std::string_view kSink = "SINK";
inline constexpr std::string_view kNeutral = "NEUTRAL";

struct OperationSpec {
  std::string machine;
  Tick duration = 1;

  bool operator==(const OperationSpec&) const = default;
};

struct JobSpec {
  std::string id;
  std::string job_type;  // defaults to id
  std::optional<Tick> due;
  double weight = 1.0;
  std::vector<OperationSpec> ops;

  bool operator==(const JobSpec&) const = default;
};

enum class BufferOrder { any, fifo };

struct MachineSpec {
  std::string id;
  std::optional<int> pre_buffer_capacity;   // nullopt = unbounded
  std::optional<int> post_buffer_capacity;  // nullopt = unbounded
  BufferOrder buffer_order = BufferOrder::any;

  bool operator==(const MachineSpec&) const = default;
};

struct TransportSpec {
  std::string id;
  int capacity = 1;
  Tick load_time = 0;
  Tick unload_time = 0;

  bool operator==(const TransportSpec&) const = default;
};

struct TravelEntry {
  std::string from;
  std::string to;
  Tick duration = 0;

  bool operator==(const TravelEntry&) const = default;
};

/// Directed travel times between locations (machine ids, SOURCE, SINK).
struct TravelTimeMatrix {
  std::vector<TravelEntry> entries;

  std::optional<Tick> lookup(std::string_view from, std::string_view to) const;
  bool empty() const noexcept { return entries.empty(); }
  bool operator==(const TravelTimeMatrix&) const = default;
};

struct SetupRule {
  std::string machine;
  std::string from_type;  // a job type or NEUTRAL
  std::string to_type;
  Tick duration = 0;

  bool operator==(const SetupRule&) const = default;
};

struct OutageSpec {
  std::string resource;  // machine or transport id
  Tick mean_time_between_failures = 1;
  Tick mean_time_to_repair = 1;

  bool operator==(const OutageSpec&) const = default;
};

enum class StochasticScope { processing, transport };

struct Distribution {
  enum class Kind { deterministic, uniform, gamma };
  Kind kind = Kind::deterministic;
  double a = 1.0;  // uniform: lo factor; gamma: shape
  double b = 1.0;  // uniform: hi factor; gamma: scale

  static Distribution deterministic() { return {}; }
  static Distribution uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
  static Distribution gamma(double shape, double scale) { return {Kind::gamma, shape, scale}; }

  bool is_degenerate() const noexcept;
  bool operator==(const Distribution&) const = default;
};

struct StochasticSpec {
  StochasticScope scope = StochasticScope::processing;
  Distribution distribution;
  std::optional<std::string> applies_to;  // nullopt = all resources in scope

  bool operator==(const StochasticSpec&) const = default;
};

/// alpha | beta | gamma classification. Beta lists active extensions in canonical order.
struct ThreeFieldTag {
  std::string alpha = "J";
  std::vector<std::string> beta;
  std::string gamma = "Cmax";

  std::string to_string() const;
  bool has(std::string_view extension) const;
  bool operator==(const ThreeFieldTag&) const = default;
};

struct Instance {
  std::string name;
  std::vector<JobSpec> jobs;
  std::vector<MachineSpec> machines;
  std::vector<TransportSpec> transports;
  TravelTimeMatrix travel;
  std::vector<SetupRule> setups;
  std::vector<OutageSpec> outage_specs;
  std::vector<StochasticSpec> stochastic_specs;
  ThreeFieldTag classification;

  std::size_t total_operations() const noexcept;
  Tick total_processing_time() const noexcept;
  const MachineSpec* find_machine(std::string_view id) const;
  const TransportSpec* find_transport(std::string_view id) const;
  const JobSpec* find_job(std::string_view id) const;

  bool operator==(const Instance&) const = default;
};

/// Parses the line-oriented instance language. Throws ParseError (and its
/// ReferenceError / DuplicateIdError subclasses) or InvalidInstance.
Instance parse_instance_dsl(std::string_view text);

/// Inverse of parse_instance_dsl: parse_instance_dsl(to_dsl(i)) == i.
std::string to_dsl(const Instance& inst);

/// Classical OR-Library job-shop format: "n m" header then n rows of m
/// (machine, duration) pairs with 0-based machine indices. '#' starts a comment.
Instance parse_orlib(std::string_view text, std::string name = "orlib");

/// Every broken invariant as a human-readable line; empty iff valid.
std::vector<std::string> validate_instance(const Instance& inst);

/// Drops transports, travel, buffer limits, setups, outages and stochastics.
Instance classical_reduction(const Instance& inst);

ThreeFieldTag classify(const Instance& inst);

/// Locations that transports can visit: SOURCE then every machine id.
std::vector<std::string> transport_locations(const Instance& inst);

}  // namespace jsl
