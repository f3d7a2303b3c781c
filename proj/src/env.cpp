#include "jobshoplab/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jobshoplab/errors.hpp"

namespace jsl {

std::shared_ptr<const PluginChain> build_plugins(const Instance& inst, const EnvConfig& cfg) {
  std::vector<std::shared_ptr<const Plugin>> list;
  auto listed = [&](std::string_view kind) {
    return std::any_of(cfg.plugins.begin(), cfg.plugins.end(), [&](const auto& p) { return p.kind == kind; });
  };
  for (const auto& p : cfg.plugins) {
    try {
      list.push_back(make_plugin(inst, p.kind, p.params));
    } catch (const ConfigError& e) {
      if (p.line > 0) throw ConfigError("config line " + std::to_string(p.line) + ": " + e.what());
      throw;
    }
  }
  if (cfg.extensions) {
    if (!inst.setups.empty() && !listed("setup_times")) list.push_back(make_plugin(inst, "setup_times", {}));
    if (!inst.outage_specs.empty() && !listed("breakdowns")) list.push_back(make_plugin(inst, "breakdowns", {}));
    if (!inst.stochastic_specs.empty() && !listed("stochastic")) list.push_back(make_plugin(inst, "stochastic", {}));
  }
  return compose_plugins(std::move(list));
}

std::optional<Candidate> offered_candidate(const SimContext& ctx, const SimState& s) {
  const auto cands = enabled_actions(ctx, s);
  if (cands.empty()) return std::nullopt;
  return cands[static_cast<std::size_t>(s.cursor) % cands.size()];
}

Observation observe_simple(const SimContext& ctx, const SimState& s) {
  Observation f{};
  const double horizon = static_cast<double>(ctx.horizon_bound());
  f[0] = static_cast<double>(s.now) / horizon;

  int done = 0, total = 0;
  for (int j = 0; j < ctx.job_count(); ++j) {
    done += s.jobs[j].next_op;
    total += ctx.op_count(j);
  }
  f[1] = total > 0 ? static_cast<double>(done) / total : 1.0;

  if (auto c = offered_candidate(ctx, s)) {
    const int job = c->job();
    const int op = s.jobs[job].next_op;
    const int machine = ctx.op_machine(job, op);
    f[2] = static_cast<double>(ctx.op_duration(job, op)) / static_cast<double>(ctx.max_op_duration());
    const auto ticks = machine_mode_ticks(s);
    f[3] = s.now > 0 ? static_cast<double>(ticks[machine][static_cast<int>(MachineMode::idle)]) / static_cast<double>(s.now)
                     : 1.0;
    f[4] = static_cast<double>(ctx.remaining_work(job, op)) / static_cast<double>(ctx.job_work(job));
  }

  if (ctx.machine_count() > 0) {
    const auto idle = std::count_if(s.machines.begin(), s.machines.end(),
                                    [](const MachineState& m) { return m.mode == MachineMode::idle; });
    f[5] = static_cast<double>(idle) / ctx.machine_count();
  }

  long used = 0, cap = 0;
  for (const auto& b : s.buffers) {
    if (!b.capacity) continue;
    used += static_cast<long>(b.slots.size());
    cap += *b.capacity;
  }
  f[6] = cap > 0 ? static_cast<double>(used) / static_cast<double>(cap) : 0.0;

  for (double& x : f) x = std::clamp(std::isfinite(x) ? x : 0.0, 0.0, 1.0);
  return f;
}

Environment::Environment(Instance inst, EnvConfig cfg) : cfg_(std::move(cfg)) {
  auto plugins = build_plugins(inst, cfg_);
  ctx_ = std::make_shared<const SimContext>(std::move(inst), SimOptions{cfg_.extensions, cfg_.extensions}, std::move(plugins));
}

std::pair<SimState, Observation> Environment::reset(std::optional<std::uint64_t> seed) const {
  SimState s = advance_to_decision(*ctx_, initial_state(*ctx_, seed.value_or(cfg_.seed)));
  return {s, observe(s)};
}

int Environment::multidiscrete_slots() const {
  return ctx_->machine_count() + (ctx_->transport_active() ? ctx_->transport_count() : 0);
}

std::vector<int> Environment::action_space() const {
  if (cfg_.action == ActionMode::binary) return {2};
  return std::vector<int>(static_cast<std::size_t>(multidiscrete_slots()), ctx_->job_count() + 1);
}

std::vector<Event> Environment::decode_binary(const SimState& s, const BinaryAction& a) const {
  if (!a.commit) return {};
  auto c = offered_candidate(*ctx_, s);
  if (!c) return {};
  c->event.time = s.now;
  return {c->event};
}

namespace {

struct Decoded {
  SimState state;
  std::vector<Event> applied;
};

Decoded apply_slots(const SimContext& ctx, const SimState& s, const std::vector<int>& choices, StepInfo* info) {
  Decoded d{open_batch(s, s.now), {}};
  // Transport slots first: simultaneous agent events follow the priority order.
  std::vector<std::size_t> order(choices.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_partition(order.begin(), order.end(),
                        [&](std::size_t i) { return static_cast<int>(i) >= ctx.machine_count(); });
  for (std::size_t slot : order) {
    if (choices[slot] == 0) continue;
    const int job = choices[slot] - 1;
    const int m = static_cast<int>(slot);
    Candidate c = m < ctx.machine_count() ? machine_assign(m, job) : transport_assign(m - ctx.machine_count(), job);
    c.event.time = s.now;
    if (auto err = agent_event_error(ctx, d.state, c.event)) {
      if (info) {
        info->invalid_action = true;
        info->invalid_reasons.push_back("slot " + std::to_string(slot) + ": " + *err);
      }
      continue;
    }
    d.state = apply_event(ctx, d.state, c.event);
    d.applied.push_back(c.event);
  }
  return d;
}

}  // namespace

std::vector<Event> Environment::decode_multidiscrete(const SimState& s, const MultiDiscreteAction& a,
                                                     StepInfo* info) const {
  return apply_slots(*ctx_, s, a.choices, info).applied;
}

SimState Environment::advance_time(const SimState& s) const {
  SimState next = s;
  next.cursor = 0;
  const Tick target = next.pending.empty() ? next.now + 1 : std::max(next.now, next.pending.front().time);
  next = advance(*ctx_, next, target);
  return advance_to_decision(*ctx_, next);
}

StepResult Environment::step(const SimState& s, const Action& a) const {
  if (is_terminal(s)) throw Error("step called on a finished episode");
  StepResult r;
  r.state = s;
  auto reject_action = [&](std::string why) {
    r.info.invalid_action = true;
    r.info.invalid_reasons.push_back(std::move(why));
    r.observation = observe(s);
    r.reward = 0;
    r.info.reward_num = 0;
    r.info.reward_den = ctx_->horizon_bound();
    return r;
  };

  if (cfg_.action == ActionMode::binary) {
    const auto* b = std::get_if<BinaryAction>(&a);
    if (!b) return reject_action("expected a binary action");
    const auto cands = enabled_actions(*ctx_, s);
    if (cands.empty()) {
      r.state = advance_time(s);
      r.info.time_advanced = true;
    } else if (b->commit) {
      Event e = cands[static_cast<std::size_t>(s.cursor) % cands.size()].event;
      e.time = s.now;
      SimState next = apply_event(*ctx_, open_batch(s, s.now), e);
      next.cursor = 0;
      r.state = advance_to_decision(*ctx_, next);
      r.info.applied.push_back(e);
    } else {
      r.state.cursor = s.cursor + 1;
      if (r.state.cursor >= static_cast<int>(cands.size())) {
        r.state = advance_time(r.state);
        r.info.time_advanced = true;
      }
    }
  } else {
    const auto* md = std::get_if<MultiDiscreteAction>(&a);
    if (!md) return reject_action("expected a multidiscrete action");
    if (static_cast<int>(md->choices.size()) != multidiscrete_slots())
      return reject_action("expected " + std::to_string(multidiscrete_slots()) + " slots, got " +
                           std::to_string(md->choices.size()));
    for (std::size_t i = 0; i < md->choices.size(); ++i)
      if (md->choices[i] < 0 || md->choices[i] > ctx_->job_count())
        return reject_action("slot " + std::to_string(i) + " out of range");
    if (std::all_of(md->choices.begin(), md->choices.end(), [](int c) { return c == 0; })) {
      r.state = advance_time(s);
      r.info.time_advanced = true;
    } else {
      Decoded d = apply_slots(*ctx_, s, md->choices, &r.info);
      if (d.applied.empty()) return reject_action("no valid assignment in action");
      d.state.cursor = 0;
      r.state = advance_to_decision(*ctx_, d.state);
      r.info.applied = std::move(d.applied);
    }
  }
  finish(s, r);
  return r;
}

void Environment::finish(const SimState& prev, StepResult& r) const {
  const SimContext& ctx = *ctx_;
  r.done = is_terminal(r.state);
  r.observation = observe(r.state);
  const Tick h = ctx.horizon_bound();
  r.info.reward_den = h;
  if (cfg_.reward.kind == "makespan") {
    if (cfg_.reward.mode == RewardMode::dense) r.info.reward_num = -(r.state.now - prev.now);
    else r.info.reward_num = r.done ? -makespan(r.state) : 0;
    r.reward = static_cast<double>(r.info.reward_num) / static_cast<double>(h);
  }
  if (!r.done) return;
  r.info.objectives = compute_objectives(ctx, r.state);
  if (ctx.plugins()) r.info.plugin_metrics = ctx.plugins()->metrics(ctx, r.state);
  if (cfg_.reward.kind == "weighted") {
    const Instance& inst = ctx.instance();
    const double hd = static_cast<double>(h);
    const double wsum = std::accumulate(inst.jobs.begin(), inst.jobs.end(), 0.0,
                                        [](double acc, const JobSpec& j) { return acc + j.weight; });
    double max_rate = 0;
    if (ctx.plugins())
      for (const auto& p : ctx.plugins()->plugins())
        if (const auto* rates = consumption_rates(*p))
          for (const auto& row : rates->per_machine)
            for (double x : row) max_rate = std::max(max_rate, x);
    auto norm = [&](const std::string& name) {
      if (name == "makespan" || name == "max_lateness") return hd;
      if (name == "total_weighted_completion" || name == "total_weighted_tardiness") return hd * std::max(wsum, 1e-12);
      if (name == "weighted_tardy_count") return std::max(wsum, 1e-12);
      if (name == "total_energy") return max_rate > 0 ? hd * max_rate * ctx.machine_count() : 1.0;
      return hd * std::max(ctx.job_count(), 1);
    };
    double total = 0;
    for (const auto& [name, w] : cfg_.reward.weights) total += w * r.info.objectives->get(name) / norm(name);
    r.reward = -total;
    r.info.reward_num = 0;
    r.info.reward_den = 1;
  }
}

}  // namespace jsl
