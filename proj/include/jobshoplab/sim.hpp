#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jobshoplab/event.hpp"
#include "jobshoplab/instance.hpp"
#include "jobshoplab/state.hpp"

namespace jsl {

class PluginChain;

/// Which instance-level constraints the state machine honours.
struct SimOptions {
  bool transport = true;      // route jobs through transports when the instance declares any
  bool buffer_limits = true;  // bounded capacities and FIFO retrieval

  bool operator==(const SimOptions&) const = default;
};

/// Immutable episode context: the instance, its resolved indices, and the plug-ins.
class SimContext {
 public:
  explicit SimContext(Instance inst, SimOptions options = {}, std::shared_ptr<const PluginChain> plugins = nullptr);

  const Instance& instance() const noexcept { return *inst_; }
  const SimOptions& options() const noexcept { return options_; }
  const PluginChain* plugins() const noexcept { return plugins_.get(); }

  bool transport_active() const noexcept { return transport_active_; }
  /// Any bounded buffer: enables the deadlock-avoidance check.
  bool bounded_buffers() const noexcept { return bounded_; }

  int job_count() const noexcept { return static_cast<int>(ops_.size()); }
  int machine_count() const noexcept { return static_cast<int>(inst_->machines.size()); }
  int transport_count() const noexcept { return static_cast<int>(inst_->transports.size()); }
  int buffer_count() const noexcept { return 2 + 2 * machine_count(); }
  int op_count(int job) const { return static_cast<int>(ops_[job].size()); }
  int op_machine(int job, int op) const { return ops_[job][op].first; }
  Tick op_duration(int job, int op) const { return ops_[job][op].second; }
  int job_type(int job) const { return job_types_[job]; }
  int type_count() const noexcept { return static_cast<int>(type_names_.size()); }
  const std::string& type_name(int type) const { return type_names_[type]; }
  std::optional<int> type_index(std::string_view name) const;
  std::optional<int> machine_index(std::string_view id) const;
  std::optional<int> transport_index(std::string_view id) const;
  std::optional<int> job_index(std::string_view id) const;

  /// Location of a machine or SOURCE: 0 = SOURCE, 1 + k = machine k.
  static int location_index(ResourceRef loc) { return loc.kind == ResourceKind::machine ? 1 + loc.index : 0; }
  Tick travel(ResourceRef from, ResourceRef to) const;
  Tick max_travel() const noexcept { return max_travel_; }
  /// Setup rule value for (machine, previous type or -1, next type); 0 when no rule.
  Tick setup_rule(int machine, int from_type, int to_type) const;

  /// Σ nominal durations plus one maximal relocation per operation when transports are active.
  Tick horizon_bound() const noexcept { return horizon_; }
  Tick remaining_work(int job, int from_op) const;
  Tick job_work(int job) const { return remaining_work(job, 0); }
  Tick max_op_duration() const noexcept { return max_op_; }

  std::string resource_name(ResourceRef r) const;
  std::string job_name(int job) const;
  std::optional<ResourceRef> resource_from_name(std::string_view name) const;

  /// Called after every applied event. Intended for instrumentation in tests.
  using Observer = std::function<void(const SimState&, const Event&)>;
  void set_observer(Observer obs) { observer_ = std::move(obs); }
  const Observer& observer() const noexcept { return observer_; }

 private:
  std::shared_ptr<const Instance> inst_;
  SimOptions options_;
  std::shared_ptr<const PluginChain> plugins_;
  bool transport_active_ = false;
  bool bounded_ = false;
  std::vector<std::vector<std::pair<int, Tick>>> ops_;
  std::vector<int> job_types_;
  std::vector<std::string> type_names_;
  std::vector<Tick> travel_;  // (machines + 1)^2
  Tick max_travel_ = 0;
  std::vector<std::vector<Tick>> setup_table_;  // per machine: (from_type + 1) * types + to_type
  Tick horizon_ = 1;
  Tick max_op_ = 1;
  Observer observer_;
};

/// One agent-triggerable event that is valid in the current state.
struct Candidate {
  Event event;

  EventKind kind() const noexcept { return event.kind; }
  ResourceRef unit() const noexcept { return event.unit; }
  int job() const noexcept { return event.job; }
  bool operator==(const Candidate&) const = default;
};

Candidate machine_assign(int machine, int job);
Candidate transport_assign(int transport, int job);

/// rho for a concrete event.
inline double priority(const Event& e) { return priority(e.kind); }

/// Fresh episode state at t = 0 with plug-in reset hooks applied and
/// initial transfers queued (no events applied yet).
SimState initial_state(const SimContext& ctx, std::uint64_t seed);

/// Atomic transition T(s, e). e.time must equal s.now. Throws InvalidTransition.
SimState apply_event(const SimContext& ctx, const SimState& s, const Event& e);

/// Reason an agent event is not applicable, or nullopt when it is.
std::optional<std::string> agent_event_error(const SimContext& ctx, const SimState& s, const Event& e);

/// Processes queued events with time <= t in (time, descending rho, resource, job) order
/// and leaves now = t.
SimState advance(const SimContext& ctx, const SimState& s, Tick t);

/// The next set of simultaneously due events (earliest time <= t) in application order.
std::vector<Event> due_batch(const SimState& s, Tick t);
/// Moves the clock to `time` and opens a new batch, as advance does before each sorted set.
SimState open_batch(const SimState& s, Tick time);
bool is_pending(const SimState& s, const Event& e);

/// Queues an event (assigning its sequence number). For scenario construction.
SimState enqueue(const SimState& s, Event e);
/// In-place variant used by plug-ins.
void push_event(SimState& s, Event e);

std::vector<Candidate> enabled_actions(const SimContext& ctx, const SimState& s);

/// Advances to the next state with a non-empty action set, or to termination.
SimState advance_to_decision(const SimContext& ctx, const SimState& s);
/// nullopt means TERMINAL.
std::optional<Tick> next_decision_time(const SimContext& ctx, const SimState& s);

bool is_terminal(const SimState& s);
/// C_max = max C_{i,j}; throws Error when the state is not terminal.
Tick makespan(const SimState& s);

/// Structural invariants (conservation, capacities, queue ordering). Empty when consistent.
std::vector<std::string> check_invariants(const SimContext& ctx, const SimState& s);

/// Deadlock-avoidance test: every job in the system can still finish its route.
bool is_safe(const SimContext& ctx, const SimState& s);

}  // namespace jsl
