#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "jobshoplab/plugins.hpp"
#include "jobshoplab/sim.hpp"

namespace jsl {

enum class ActionMode { binary, multidiscrete };
enum class RewardMode { terminal, dense };

struct RewardSpec {
  std::string kind = "makespan";          // makespan | weighted
  RewardMode mode = RewardMode::terminal;
  std::map<std::string, double> weights;  // weighted only; keys are ObjectiveVector field names

  bool operator==(const RewardSpec&) const = default;
};

struct PluginConfig {
  std::string kind;
  PluginParams params;
  int line = 0;

  bool operator==(const PluginConfig&) const = default;
};

struct EnvConfig {
  std::string observation = "simple";
  ActionMode action = ActionMode::binary;
  RewardSpec reward;
  std::vector<PluginConfig> plugins;
  std::uint64_t seed = 0;
  /// Off: no transports, no buffer limits, and no plug-ins implied by the instance.
  bool extensions = true;

  bool operator==(const EnvConfig&) const = default;
};

/// Line-oriented configuration language. Throws ConfigError.
EnvConfig parse_config_dsl(std::string_view text);
std::string to_config_dsl(const EnvConfig& cfg);

/// Names of the objective vector fields, in declaration order.
const std::vector<std::string>& objective_names();

struct ObjectiveVector {
  Tick makespan = 0;
  Tick max_lateness = 0;
  double total_weighted_completion = 0;
  double total_weighted_tardiness = 0;
  double weighted_tardy_count = 0;
  double total_energy = 0;
  double total_buffer_occupancy_time = 0;

  double get(std::string_view name) const;
  bool operator==(const ObjectiveVector&) const = default;
};

/// Objectives from a terminal trace. `energy` comes from the consumption accumulators.
ObjectiveVector objectives_from_trace(const Instance& inst, const std::vector<TraceRecord>& trace, double energy = 0.0);
/// Objectives of a terminal state, energy included. Throws Error when not terminal.
ObjectiveVector compute_objectives(const SimContext& ctx, const SimState& s);

inline constexpr std::size_t kObservationSize = 7;
using Observation = std::array<double, kObservationSize>;

/// The candidate a binary agent is currently offered.
std::optional<Candidate> offered_candidate(const SimContext& ctx, const SimState& s);
Observation observe_simple(const SimContext& ctx, const SimState& s);

struct BinaryAction {
  bool commit = true;
};
struct MultiDiscreteAction {
  std::vector<int> choices;  // machines then transports; 0 = no-op, k = job k-1
};
using Action = std::variant<BinaryAction, MultiDiscreteAction>;

struct StepInfo {
  bool invalid_action = false;
  std::vector<std::string> invalid_reasons;
  std::vector<Event> applied;
  bool time_advanced = false;
  /// Exact reward: reward = reward_num / reward_den for makespan rewards.
  std::int64_t reward_num = 0;
  std::int64_t reward_den = 1;
  std::optional<ObjectiveVector> objectives;
  PluginMetrics plugin_metrics;
};

struct StepResult {
  SimState state;
  Observation observation{};
  double reward = 0;
  bool done = false;
  StepInfo info;
};

/// Episodic control surface around the state machine. Stateless: states are values.
class Environment {
 public:
  /// Resolves the plug-ins against the instance. Throws ConfigError.
  Environment(Instance inst, EnvConfig cfg);

  const SimContext& context() const noexcept { return *ctx_; }
  const EnvConfig& config() const noexcept { return cfg_; }
  const Instance& instance() const noexcept { return ctx_->instance(); }

  /// Fresh episode at its first decision point. Uses the config seed when none is given.
  std::pair<SimState, Observation> reset(std::optional<std::uint64_t> seed = std::nullopt) const;
  StepResult step(const SimState& s, const Action& a) const;
  Observation observe(const SimState& s) const { return observe_simple(*ctx_, s); }

  /// Slot sizes: {2} for binary, n_jobs + 1 per slot for multidiscrete.
  std::vector<int> action_space() const;
  int multidiscrete_slots() const;

  /// Agent events the action translates to, without applying them. Flags go to `info`.
  std::vector<Event> decode_binary(const SimState& s, const BinaryAction& a) const;
  std::vector<Event> decode_multidiscrete(const SimState& s, const MultiDiscreteAction& a, StepInfo* info) const;

  /// The same environment on a modified instance (shared config and plug-in parameters).
  Environment with_instance(Instance inst) const { return Environment(std::move(inst), cfg_); }

 private:
  SimState advance_time(const SimState& s) const;
  void finish(const SimState& prev, StepResult& r) const;

  EnvConfig cfg_;
  std::shared_ptr<const SimContext> ctx_;
};

/// Plug-in chain for an instance: explicit config entries plus, when extensions are
/// on, the plug-ins implied by the instance's setup rules, outages and stochastic specs.
std::shared_ptr<const PluginChain> build_plugins(const Instance& inst, const EnvConfig& cfg);

}  // namespace jsl
