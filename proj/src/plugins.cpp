#include "jobshoplab/plugins.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>

#include "jobshoplab/errors.hpp"

namespace jsl {

std::uint64_t Plugin::stream(const SimState& s, std::string_view unit) const {
  std::string name = label_;
  name += '/';
  name += unit;
  return derive_stream(s.seed, name);
}

PluginChain::PluginChain(std::vector<std::shared_ptr<const Plugin>> plugins) : plugins_(std::move(plugins)) {}

const Plugin* PluginChain::find(std::string_view kind) const {
  for (const auto& p : plugins_)
    if (p->kind() == kind) return p.get();
  return nullptr;
}

void PluginChain::on_reset(const SimContext& ctx, SimState& s) const {
  for (const auto& p : plugins_) p->on_reset(ctx, s);
}

Tick PluginChain::realize(const SimContext& ctx, SimState& s, const DurationRequest& req) const {
  Tick d = req.nominal;
  for (const auto& p : plugins_) d = p->realize(ctx, s, req, d);
  return d;
}

void PluginChain::on_event(const SimContext& ctx, SimState& s, const Event& e) const {
  for (const auto& p : plugins_) p->on_event(ctx, s, e);
}

PluginMetrics PluginChain::metrics(const SimContext& ctx, const SimState& s) const {
  PluginMetrics out;
  for (const auto& p : plugins_) p->contribute(ctx, s, out);
  return out;
}

std::vector<std::array<Tick, kMachineModes>> machine_mode_ticks(const SimState& s) {
  std::vector<std::array<Tick, kMachineModes>> out;
  out.reserve(s.machines.size());
  for (const auto& m : s.machines) {
    auto ticks = m.mode_ticks;
    ticks[static_cast<std::size_t>(m.mode)] += s.now - m.mode_since;
    out.push_back(ticks);
  }
  return out;
}

double energy(const ConsumptionRates& rates, const std::vector<std::array<Tick, kMachineModes>>& ticks,
              std::vector<double>* per_machine) {
  double total = 0;
  if (per_machine) per_machine->assign(ticks.size(), 0.0);
  for (std::size_t m = 0; m < ticks.size() && m < rates.per_machine.size(); ++m) {
    double e = 0;
    for (int k = 0; k < kMachineModes; ++k) e += rates.per_machine[m][k] * static_cast<double>(ticks[m][k]);
    if (per_machine) (*per_machine)[m] = e;
    total += e;
  }
  return total;
}

namespace {

double to_number(std::string_view kind, const std::string& key, const std::string& value) {
  double v = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ConfigError("plugin " + std::string(kind) + ": " + key + " expects a number, got '" + value + "'");
  return v;
}

Tick round_ticks(double x, Tick min) { return std::max<Tick>(min, static_cast<Tick>(std::llround(x))); }

double exponential(RngStreams& rng, std::uint64_t key, double mean) {
  return -mean * std::log1p(-rng.uniform(key));
}

class StochasticPlugin final : public Plugin {
 public:
  StochasticPlugin(std::string label, std::vector<StochasticSpec> specs) : Plugin(std::move(label)), specs_(std::move(specs)) {}
  std::string_view kind() const override { return "stochastic"; }
  int order() const override { return 0; }

  Tick realize(const SimContext& ctx, SimState& s, const DurationRequest& req, Tick current) const override {
    if (req.kind == DurationKind::setup || current == 0) return current;
    const std::string unit = ctx.resource_name(req.unit);
    const StochasticSpec* spec = match(req.kind == DurationKind::processing ? StochasticScope::processing
                                                                             : StochasticScope::transport,
                                       unit);
    if (!spec) return current;
    const double f = factor(s, spec->distribution, stream(s, unit));
    const Tick out = round_ticks(static_cast<double>(current) * f, 1);
    s.plugin_output.samples.push_back({req.kind, req.unit, req.job, current, out});
    return out;
  }

  void contribute(const SimContext&, const SimState& s, PluginMetrics& m) const override {
    m["stochastic.samples"] = static_cast<double>(s.plugin_output.samples.size());
  }

 private:
  const StochasticSpec* match(StochasticScope scope, const std::string& unit) const {
    const StochasticSpec* general = nullptr;
    for (const auto& sp : specs_) {
      if (sp.scope != scope) continue;
      if (sp.applies_to && *sp.applies_to == unit) return &sp;
      if (!sp.applies_to) general = &sp;
    }
    return general;
  }

  static double factor(SimState& s, const Distribution& d, std::uint64_t key) {
    switch (d.kind) {
      case Distribution::Kind::deterministic: return 1.0;
      case Distribution::Kind::uniform: return d.a + (d.b - d.a) * s.rng.uniform(key);
      case Distribution::Kind::gamma: {
        std::mt19937_64 gen(s.rng.bits(key));
        return std::gamma_distribution<double>(d.a, d.b)(gen);
      }
    }
    return 1.0;
  }

  std::vector<StochasticSpec> specs_;
};

class SetupPlugin final : public Plugin {
 public:
  using Plugin::Plugin;
  std::string_view kind() const override { return "setup_times"; }
  int order() const override { return 1; }

  Tick realize(const SimContext& ctx, SimState& s, const DurationRequest& req, Tick current) const override {
    if (req.kind != DurationKind::setup) return current;
    const Tick d = current + ctx.setup_rule(req.unit.index, req.from_type, req.to_type);
    if (d > 0) {
      ++s.plugin_output.setups_inserted;
      s.plugin_output.setup_ticks += d;
    }
    return d;
  }

  void contribute(const SimContext&, const SimState& s, PluginMetrics& m) const override {
    m["setup_times.count"] = static_cast<double>(s.plugin_output.setups_inserted);
    m["setup_times.ticks"] = static_cast<double>(s.plugin_output.setup_ticks);
  }
};

struct OutageTarget {
  ResourceRef unit;
  double mtbf = 1;
  double mttr = 1;
};

class BreakdownPlugin final : public Plugin {
 public:
  BreakdownPlugin(std::string label, std::vector<OutageTarget> targets) : Plugin(std::move(label)), targets_(std::move(targets)) {}
  std::string_view kind() const override { return "breakdowns"; }
  int order() const override { return 2; }

  void on_reset(const SimContext& ctx, SimState& s) const override {
    for (const auto& t : targets_) {
      const Tick ttf = round_ticks(exponential(s.rng, stream(s, ctx.resource_name(t.unit)), t.mtbf), 1);
      push_event(s, timed(s.now + ttf, EventKind::BreakdownStart, t.unit));
    }
  }

  void on_event(const SimContext& ctx, SimState& s, const Event& e) const override {
    if (!is_breakdown(e.kind)) return;
    const OutageTarget* t = find(e.unit);
    if (!t) return;
    const auto key = stream(s, ctx.resource_name(t->unit));
    if (e.kind == EventKind::BreakdownStart) {
      const std::size_t idx = static_cast<std::size_t>(e.unit.kind == ResourceKind::machine ? e.unit.index
                                                                                          : ctx.machine_count() + e.unit.index);
      ++s.plugin_output.breakdowns[idx];
      push_event(s, timed(s.now + round_ticks(exponential(s.rng, key, t->mttr), 1), EventKind::RepairComplete, e.unit));
    } else {
      push_event(s, timed(s.now + round_ticks(exponential(s.rng, key, t->mtbf), 1), EventKind::BreakdownStart, e.unit));
    }
  }

  void contribute(const SimContext& ctx, const SimState& s, PluginMetrics& m) const override {
    double total = 0;
    for (std::size_t i = 0; i < s.plugin_output.breakdowns.size(); ++i) {
      const auto n = static_cast<double>(s.plugin_output.breakdowns[i]);
      const int mc = ctx.machine_count();
      const ResourceRef r = static_cast<int>(i) < mc ? ResourceRef::machine(static_cast<int>(i))
                                                    : ResourceRef::transport(static_cast<int>(i) - mc);
      if (n > 0) m["breakdowns." + ctx.resource_name(r)] = n;
      total += n;
    }
    m["breakdowns.count"] = total;
  }

 private:
  static Event timed(Tick t, EventKind kind, ResourceRef unit) {
    Event e;
    e.time = t;
    e.kind = kind;
    e.unit = unit;
    return e;
  }

  const OutageTarget* find(ResourceRef r) const {
    for (const auto& t : targets_)
      if (t.unit == r) return &t;
    return nullptr;
  }

  std::vector<OutageTarget> targets_;
};

class ConsumptionPlugin final : public Plugin {
 public:
  ConsumptionPlugin(std::string label, ConsumptionRates rates) : Plugin(std::move(label)), rates_(std::move(rates)) {}
  std::string_view kind() const override { return "consumption"; }
  int order() const override { return 3; }
  const ConsumptionRates& rates() const noexcept { return rates_; }

  void on_event(const SimContext&, SimState& s, const Event&) const override {
    for (std::size_t m = 0; m < s.machines.size(); ++m) s.plugin_output.consumption_ticks[m] = s.machines[m].mode_ticks;
  }

  void contribute(const SimContext& ctx, const SimState& s, PluginMetrics& m) const override {
    std::vector<double> per;
    m["consumption.energy"] = energy(rates_, machine_mode_ticks(s), &per);
    for (std::size_t i = 0; i < per.size(); ++i)
      m["consumption.energy." + ctx.resource_name(ResourceRef::machine(static_cast<int>(i)))] = per[i];
  }

 private:
  ConsumptionRates rates_;
};

std::string take_label(PluginParams& params, std::string_view kind) {
  auto it = params.find("label");
  if (it == params.end()) return std::string(kind);
  std::string label = it->second;
  params.erase(it);
  return label;
}

void reject_unknown(std::string_view kind, const PluginParams& params) {
  if (!params.empty()) throw ConfigError("plugin " + std::string(kind) + ": unknown parameter '" + params.begin()->first + "'");
}

std::shared_ptr<const Plugin> make_stochastic(const Instance& inst, PluginParams params) {
  const std::string label = take_label(params, "stochastic");
  auto specs = inst.stochastic_specs;
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    std::string v = it->second;
    params.erase(it);
    return v;
  };
  const auto dist = take("dist");
  const auto scope = take("scope").value_or("processing");
  const auto resource = take("resource");
  auto num = [&](const std::string& key, double def) {
    auto v = take(key);
    return v ? to_number("stochastic", key, *v) : def;
  };
  const double lo = num("lo", 1.0), hi = num("hi", 1.0), shape = num("shape", 1.0), scale = num("scale", 1.0);
  reject_unknown("stochastic", params);
  if (dist) {
    Distribution d;
    if (*dist == "deterministic") d = Distribution::deterministic();
    else if (*dist == "uniform") d = Distribution::uniform(lo, hi);
    else if (*dist == "gamma") d = Distribution::gamma(shape, scale);
    else throw ConfigError("plugin stochastic: unknown distribution '" + *dist + "'");
    if (d.kind == Distribution::Kind::uniform && (lo <= 0 || hi < lo))
      throw ConfigError("plugin stochastic: need 0 < lo <= hi");
    if (d.kind == Distribution::Kind::gamma && (shape <= 0 || scale <= 0))
      throw ConfigError("plugin stochastic: gamma needs shape > 0 and scale > 0");
    std::vector<StochasticScope> scopes;
    if (scope == "processing" || scope == "all") scopes.push_back(StochasticScope::processing);
    if (scope == "transport" || scope == "all") scopes.push_back(StochasticScope::transport);
    if (scopes.empty()) throw ConfigError("plugin stochastic: unknown scope '" + scope + "'");
    if (resource && !inst.find_machine(*resource) && !inst.find_transport(*resource))
      throw ConfigError("plugin stochastic: unknown resource '" + *resource + "'");
    for (auto sc : scopes) specs.push_back({sc, d, resource});
  }
  return std::make_shared<StochasticPlugin>(label, std::move(specs));
}

std::shared_ptr<const Plugin> make_breakdowns(const Instance& inst, PluginParams params) {
  const std::string label = take_label(params, "breakdowns");
  std::optional<double> mtbf, mttr;
  for (auto it = params.begin(); it != params.end();) {
    if (it->first == "mtbf") mtbf = to_number("breakdowns", it->first, it->second);
    else if (it->first == "mttr") mttr = to_number("breakdowns", it->first, it->second);
    else {
      ++it;
      continue;
    }
    it = params.erase(it);
  }
  reject_unknown("breakdowns", params);
  if (mtbf.has_value() != mttr.has_value()) throw ConfigError("plugin breakdowns: mtbf and mttr must be given together");
  if (mtbf && (*mtbf <= 0 || *mttr <= 0)) throw ConfigError("plugin breakdowns: mtbf and mttr must be positive");

  std::vector<OutageTarget> targets;
  auto ref_of = [&](const std::string& id) {
    for (std::size_t i = 0; i < inst.machines.size(); ++i)
      if (inst.machines[i].id == id) return ResourceRef::machine(static_cast<int>(i));
    for (std::size_t i = 0; i < inst.transports.size(); ++i)
      if (inst.transports[i].id == id) return ResourceRef::transport(static_cast<int>(i));
    throw ConfigError("plugin breakdowns: unknown resource '" + id + "'");
  };
  for (const auto& o : inst.outage_specs)
    targets.push_back({ref_of(o.resource), static_cast<double>(o.mean_time_between_failures),
                       static_cast<double>(o.mean_time_to_repair)});
  if (mtbf) {
    for (std::size_t i = 0; i < inst.machines.size(); ++i) {
      const auto r = ResourceRef::machine(static_cast<int>(i));
      if (std::none_of(targets.begin(), targets.end(), [&](const auto& t) { return t.unit == r; }))
        targets.push_back({r, *mtbf, *mttr});
    }
  }
  std::sort(targets.begin(), targets.end(), [](const auto& a, const auto& b) { return a.unit < b.unit; });
  return std::make_shared<BreakdownPlugin>(label, std::move(targets));
}

std::shared_ptr<const Plugin> make_consumption(const Instance& inst, PluginParams params) {
  const std::string label = take_label(params, "consumption");
  static constexpr std::array<std::string_view, kMachineModes> kModes = {"idle", "setup", "working", "outage"};
  auto mode_of = [](std::string_view name) -> int {
    for (int k = 0; k < kMachineModes; ++k)
      if (kModes[k] == name) return k;
    return -1;
  };
  ConsumptionRates rates;
  std::array<double, kMachineModes> base{};
  for (const auto& [key, value] : params) {
    if (key.find('.') != std::string::npos) continue;
    const int k = mode_of(key);
    if (k < 0) throw ConfigError("plugin consumption: unknown parameter '" + key + "'");
    base[k] = to_number("consumption", key, value);
  }
  rates.per_machine.assign(inst.machines.size(), base);
  for (const auto& [key, value] : params) {
    const auto dot = key.rfind('.');
    if (dot == std::string::npos) continue;
    const std::string machine = key.substr(0, dot);
    const int k = mode_of(std::string_view(key).substr(dot + 1));
    auto it = std::find_if(inst.machines.begin(), inst.machines.end(), [&](const auto& m) { return m.id == machine; });
    if (k < 0 || it == inst.machines.end()) throw ConfigError("plugin consumption: unknown parameter '" + key + "'");
    rates.per_machine[static_cast<std::size_t>(it - inst.machines.begin())][k] = to_number("consumption", key, value);
  }
  for (const auto& row : rates.per_machine)
    for (double r : row)
      if (r < 0) throw ConfigError("plugin consumption: rates must be non-negative");
  return std::make_shared<ConsumptionPlugin>(label, std::move(rates));
}

}  // namespace

std::vector<std::string> plugin_kinds() { return {"setup_times", "breakdowns", "stochastic", "consumption"}; }

std::shared_ptr<const Plugin> make_plugin(const Instance& inst, std::string_view kind, const PluginParams& params) {
  if (kind == "stochastic") return make_stochastic(inst, params);
  if (kind == "breakdowns") return make_breakdowns(inst, params);
  if (kind == "consumption") return make_consumption(inst, params);
  if (kind == "setup_times") {
    PluginParams p = params;
    const std::string label = take_label(p, kind);
    reject_unknown(kind, p);
    return std::make_shared<SetupPlugin>(label);
  }
  throw ConfigError("unknown plugin '" + std::string(kind) + "'");
}

const ConsumptionRates* consumption_rates(const Plugin& p) {
  const auto* c = dynamic_cast<const ConsumptionPlugin*>(&p);
  return c ? &c->rates() : nullptr;
}

std::shared_ptr<const PluginChain> compose_plugins(std::vector<std::shared_ptr<const Plugin>> plugins) {
  for (std::size_t i = 0; i < plugins.size(); ++i)
    for (std::size_t j = i + 1; j < plugins.size(); ++j)
      if (plugins[i]->kind() == plugins[j]->kind())
        throw ConfigError("duplicate plugin '" + std::string(plugins[i]->kind()) + "'");
  std::stable_sort(plugins.begin(), plugins.end(), [](const auto& a, const auto& b) { return a->order() < b->order(); });
  return std::make_shared<const PluginChain>(std::move(plugins));
}

}  // namespace jsl
