#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "jobshoplab/sim.hpp"

namespace jsl {

/// A duration about to be scheduled. Plug-ins may rewrite `current`.
struct DurationRequest {
  DurationKind kind = DurationKind::processing;
  ResourceRef unit;
  int job = -1;
  Tick nominal = 0;
  int from_type = -1;  // setup only; -1 = NEUTRAL
  int to_type = -1;
};

using PluginParams = std::map<std::string, std::string>;
using PluginMetrics = std::map<std::string, double>;

/// Transformation hook set. Hooks mutate the successor state in place; the
/// state machine only ever hands them its own working copy.
class Plugin {
 public:
  explicit Plugin(std::string label) : label_(std::move(label)) {}
  virtual ~Plugin() = default;

  virtual std::string_view kind() const = 0;
  /// Position in the fixed composition order.
  virtual int order() const = 0;
  const std::string& label() const noexcept { return label_; }

  virtual void on_reset(const SimContext&, SimState&) const {}
  virtual Tick realize(const SimContext&, SimState&, const DurationRequest&, Tick current) const { return current; }
  virtual void on_event(const SimContext&, SimState&, const Event&) const {}
  virtual void contribute(const SimContext&, const SimState&, PluginMetrics&) const {}

  /// Stream key for draws concerning `unit`.
  std::uint64_t stream(const SimState& s, std::string_view unit) const;

 private:
  std::string label_;
};

/// Plug-ins in composition order: stochasticity, setup, breakdown, consumption.
class PluginChain {
 public:
  PluginChain() = default;
  explicit PluginChain(std::vector<std::shared_ptr<const Plugin>> plugins);

  bool empty() const noexcept { return plugins_.empty(); }
  const std::vector<std::shared_ptr<const Plugin>>& plugins() const noexcept { return plugins_; }
  const Plugin* find(std::string_view kind) const;

  void on_reset(const SimContext& ctx, SimState& s) const;
  Tick realize(const SimContext& ctx, SimState& s, const DurationRequest& req) const;
  void on_event(const SimContext& ctx, SimState& s, const Event& e) const;
  /// Merged accumulators, keyed "<kind>.<name>".
  PluginMetrics metrics(const SimContext& ctx, const SimState& s) const;

 private:
  std::vector<std::shared_ptr<const Plugin>> plugins_;
};

/// Sorts into the fixed order. Throws ConfigError on duplicate kinds.
std::shared_ptr<const PluginChain> compose_plugins(std::vector<std::shared_ptr<const Plugin>> plugins);

/// Kinds accepted by make_plugin: setup_times, breakdowns, stochastic, consumption.
std::vector<std::string> plugin_kinds();

/// Builds a plug-in from config parameters, validated against the instance.
/// Throws ConfigError on unknown kinds, keys or ids and on bad values.
std::shared_ptr<const Plugin> make_plugin(const Instance& inst, std::string_view kind, const PluginParams& params);

/// Energy per tick per machine and mode (idle, setup, working, outage).
struct ConsumptionRates {
  std::vector<std::array<double, kMachineModes>> per_machine;
};

/// Reads the rates of a consumption plug-in, or nullptr when `p` is another kind.
const ConsumptionRates* consumption_rates(const Plugin& p);

/// Ticks per machine and mode up to s.now, including currently open intervals.
std::vector<std::array<Tick, kMachineModes>> machine_mode_ticks(const SimState& s);

/// Per-machine energy and total for a consumption configuration.
double energy(const ConsumptionRates& rates, const std::vector<std::array<Tick, kMachineModes>>& ticks,
              std::vector<double>* per_machine = nullptr);

}  // namespace jsl
