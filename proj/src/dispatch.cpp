#include "jobshoplab/dispatch.hpp"

#include <algorithm>
#include <tuple>

#include "jobshoplab/errors.hpp"

namespace jsl {

namespace {

bool is_machine(const Candidate& c) { return c.kind() == EventKind::MachineAssign; }

Tick op_time(const SimContext& ctx, const SimState& s, int job) {
  return ctx.op_duration(job, s.jobs[job].next_op);
}

Tick work_left(const SimContext& ctx, const SimState& s, int job) {
  return ctx.remaining_work(job, s.jobs[job].next_op);
}

ResourceRef pickup_of(const SimState& s, int job) {
  const ResourceRef p = s.jobs[job].place;
  if (p.kind == ResourceKind::buffer && p.index >= 2) return ResourceRef::machine(buffer_machine(p.index));
  return ResourceRef::source();
}

/// Among transport candidates for `job`, the unit closest to the pickup.
std::optional<Candidate> nearest_unit(const SimContext& ctx, const SimState& s, const std::vector<Candidate>& cands,
                                      int job) {
  std::optional<Candidate> best;
  Tick best_d = 0;
  for (const auto& c : cands) {
    if (is_machine(c) || c.job() != job) continue;
    const Tick d = ctx.travel(s.transports[c.unit().index].location, pickup_of(s, job));
    if (!best || d < best_d || (d == best_d && c.unit().index < best->unit().index)) {
      best = c;
      best_d = d;
    }
  }
  return best;
}

template <class Key>
std::optional<Candidate> transport_by(const SimContext& ctx, const SimState& s, const std::vector<Candidate>& cands,
                                      Key key) {
  std::optional<int> job;
  for (const auto& c : cands) {
    if (is_machine(c)) continue;
    if (!job || key(c.job()) < key(*job)) job = c.job();
  }
  if (!job) return std::nullopt;
  return nearest_unit(ctx, s, cands, *job);
}

}  // namespace

std::optional<Candidate> fifo_transport_choice(const SimContext& ctx, const SimState& s,
                                               const std::vector<Candidate>& candidates) {
  return transport_by(ctx, s, candidates, [&](int j) { return std::make_tuple(s.jobs[j].waiting_since, j); });
}

std::optional<Candidate> SptPolicy::choose(const SimContext& ctx, const SimState& s,
                                           const std::vector<Candidate>& cands) const {
  std::optional<Candidate> best;
  auto key = [&](const Candidate& c) { return std::make_tuple(op_time(ctx, s, c.job()), c.job(), c.unit().index); };
  for (const auto& c : cands)
    if (is_machine(c) && (!best || key(c) < key(*best))) best = c;
  if (best) return best;
  return fifo_transport_choice(ctx, s, cands);
}

std::optional<Candidate> MwkrPolicy::choose(const SimContext& ctx, const SimState& s,
                                            const std::vector<Candidate>& cands) const {
  std::optional<Candidate> best;
  auto key = [&](const Candidate& c) { return std::make_tuple(-work_left(ctx, s, c.job()), c.job(), c.unit().index); };
  for (const auto& c : cands)
    if (is_machine(c) && (!best || key(c) < key(*best))) best = c;
  if (best) return best;
  return transport_by(ctx, s, cands, [&](int j) { return std::make_tuple(-work_left(ctx, s, j), j); });
}

std::optional<Candidate> RandomPolicy::choose(const SimContext&, const SimState& s,
                                              const std::vector<Candidate>& cands) const {
  if (cands.empty()) return std::nullopt;
  std::uint64_t h = derive_stream(seed_, "random-policy");
  h = splitmix64(h ^ static_cast<std::uint64_t>(s.trace.size()));
  h = splitmix64(h ^ static_cast<std::uint64_t>(s.now));
  return cands[h % cands.size()];
}

std::optional<Candidate> SequencePolicy::choose(const SimContext& ctx, const SimState& s,
                                                const std::vector<Candidate>& cands) const {
  for (const auto& c : cands) {
    if (!is_machine(c)) continue;
    const int m = c.unit().index;
    if (m >= static_cast<int>(orders_.size())) continue;
    std::size_t started = 0;
    for (int j = 0; j < ctx.job_count(); ++j)
      for (int k = 0; k < ctx.op_count(j); ++k)
        if (ctx.op_machine(j, k) == m && s.jobs[j].op_starts[k] >= 0) ++started;
    if (started < orders_[m].size() && orders_[m][started] == c.job()) return c;
  }
  return fifo_transport_choice(ctx, s, cands);
}

std::unique_ptr<Policy> make_policy(std::string_view name, std::uint64_t seed) {
  if (name == "spt") return std::make_unique<SptPolicy>();
  if (name == "mwkr") return std::make_unique<MwkrPolicy>();
  if (name == "random") return std::make_unique<RandomPolicy>(seed);
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

EpisodeResult run_episode(const Environment& env, const Policy& policy, std::uint64_t seed) {
  if (env.config().action != ActionMode::multidiscrete) {
    EnvConfig cfg = env.config();
    cfg.action = ActionMode::multidiscrete;
    return run_episode(Environment(env.instance(), cfg), policy, seed);
  }
  const SimContext& ctx = env.context();
  const auto ops = static_cast<std::int64_t>(env.instance().total_operations());
  const std::int64_t budget = std::max<std::int64_t>(10 * ops * ctx.job_count(), 100);
  auto [s, obs] = env.reset(seed);
  EpisodeResult out;
  const int slots = env.multidiscrete_slots();
  while (!is_terminal(s)) {
    if (++out.steps > budget)
      throw Error("episode exceeded the step budget of " + std::to_string(budget) + " steps at t=" + std::to_string(s.now));
    const auto cands = enabled_actions(ctx, s);
    MultiDiscreteAction a{std::vector<int>(static_cast<std::size_t>(slots), 0)};
    if (auto c = policy.choose(ctx, s, cands)) {
      const int slot = c->kind() == EventKind::MachineAssign ? c->unit().index : ctx.machine_count() + c->unit().index;
      a.choices[static_cast<std::size_t>(slot)] = c->job() + 1;
    }
    StepResult r = env.step(s, a);
    if (r.info.invalid_action)
      throw Error("policy " + policy.name() + " produced an invalid action: " + r.info.invalid_reasons.front());
    out.total_reward += r.reward;
    s = std::move(r.state);
  }
  out.objectives = compute_objectives(ctx, s);
  if (ctx.plugins()) out.plugin_metrics = ctx.plugins()->metrics(ctx, s);
  out.state = std::move(s);
  return out;
}

EpisodeResult run_episode(const Instance& inst, const EnvConfig& cfg, const Policy& policy, std::uint64_t seed) {
  EnvConfig c = cfg;
  c.action = ActionMode::multidiscrete;
  return run_episode(Environment(inst, c), policy, seed);
}

}  // namespace jsl
