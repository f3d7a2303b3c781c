#include <algorithm>
#include <set>

#include "jobshoplab/errors.hpp"
#include "jobshoplab/plugins.hpp"
#include "sim_internal.hpp"

namespace jsl {

namespace {

bool queue_less(const Event& a, const Event& b) {
  return a.time != b.time ? a.time < b.time : a.seq < b.seq;
}

bool apply_order(const Event& a, const Event& b) {
  const double pa = priority(a), pb = priority(b);
  if (pa != pb) return pa > pb;
  if (a.unit != b.unit) return a.unit < b.unit;
  if (a.job != b.job) return a.job < b.job;
  return a.seq < b.seq;
}

}  // namespace

void push_event(SimState& s, Event e) {
  e.seq = s.next_seq++;
  s.pending.insert(std::upper_bound(s.pending.begin(), s.pending.end(), e, queue_less), e);
}

SimState enqueue(const SimState& s, Event e) {
  SimState out = s;
  push_event(out, e);
  return out;
}

bool is_pending(const SimState& s, const Event& e) {
  return std::find(s.pending.begin(), s.pending.end(), e) != s.pending.end();
}

std::vector<Event> due_batch(const SimState& s, Tick t) {
  std::vector<Event> out;
  if (s.pending.empty() || s.pending.front().time > t) return out;
  const Tick first = s.pending.front().time;
  for (const Event& e : s.pending) {
    if (e.time != first) break;
    out.push_back(e);
  }
  std::sort(out.begin(), out.end(), apply_order);
  return out;
}

SimState open_batch(const SimState& s, Tick time) {
  SimState out = s;
  out.now = time;
  ++out.batch;
  return out;
}

SimState initial_state(const SimContext& ctx, std::uint64_t seed) {
  const Instance& inst = ctx.instance();
  SimState s;
  s.seed = seed;
  s.machines.resize(inst.machines.size());
  s.transports.resize(inst.transports.size());
  s.buffers.resize(static_cast<std::size_t>(ctx.buffer_count()));
  const bool limits = ctx.options().buffer_limits;
  for (int m = 0; m < ctx.machine_count(); ++m) {
    const MachineSpec& spec = inst.machines[m];
    BufferState& pre = s.buffers[pre_buffer(m)];
    BufferState& post = s.buffers[post_buffer(m)];
    if (limits) {
      pre.capacity = spec.pre_buffer_capacity;
      post.capacity = spec.post_buffer_capacity;
      pre.order = post.order = spec.buffer_order;
    }
  }
  s.jobs.resize(inst.jobs.size());
  for (int j = 0; j < ctx.job_count(); ++j) {
    s.jobs[j].op_starts.assign(static_cast<std::size_t>(ctx.op_count(j)), -1);
    s.jobs[j].op_ends.assign(static_cast<std::size_t>(ctx.op_count(j)), -1);
    s.buffers[kSourceBuffer].slots.push_back(j);
  }
  s.plugin_output.consumption_ticks.resize(inst.machines.size());
  s.plugin_output.breakdowns.assign(inst.machines.size() + inst.transports.size(), 0);
  if (ctx.plugins()) ctx.plugins()->on_reset(ctx, s);
  detail::schedule_transfers(ctx, s);
  return s;
}

SimState apply_event(const SimContext& ctx, const SimState& s, const Event& e) {
  if (e.time != s.now) detail::reject("event time " + std::to_string(e.time) + " differs from now " + std::to_string(s.now));
  SimState out = s;
  detail::step(ctx, out, e);
  return out;
}

SimState advance(const SimContext& ctx, const SimState& s, Tick t) {
  if (t < s.now) throw Error("cannot advance backwards from " + std::to_string(s.now) + " to " + std::to_string(t));
  SimState out = s;
  while (!out.pending.empty() && out.pending.front().time <= t) {
    const auto batch = due_batch(out, t);
    out.now = batch.front().time;
    ++out.batch;
    for (const Event& e : batch)
      if (is_pending(out, e)) detail::step(ctx, out, e);
  }
  out.now = t;
  return out;
}

std::vector<Candidate> enabled_actions(const SimContext& ctx, const SimState& s) {
  std::vector<Candidate> out;
  if (is_terminal(s)) return out;
  auto offer = [&](Candidate c) {
    c.event.time = s.now;
    if (!agent_event_error(ctx, s, c.event)) out.push_back(c);
  };
  for (int m = 0; m < ctx.machine_count(); ++m) {
    if (s.machines[m].mode != MachineMode::idle) continue;
    auto jobs = s.buffers[pre_buffer(m)].slots;
    std::sort(jobs.begin(), jobs.end());
    for (int j : jobs) offer(machine_assign(m, j));
  }
  if (!ctx.transport_active()) return out;
  std::vector<int> waiting;
  for (int j = 0; j < ctx.job_count(); ++j)
    if (detail::awaits_relocation(s, j)) waiting.push_back(j);
  for (int t = 0; t < ctx.transport_count(); ++t) {
    const auto mode = s.transports[t].mode;
    if (mode != TransportMode::idle && mode != TransportMode::loading) continue;
    for (int j : waiting) offer(transport_assign(t, j));
  }
  return out;
}

SimState advance_to_decision(const SimContext& ctx, const SimState& s) {
  SimState cur = s;
  for (;;) {
    if (!cur.pending.empty() && cur.pending.front().time <= cur.now) cur = advance(ctx, cur, cur.now);
    if (is_terminal(cur) || !enabled_actions(ctx, cur).empty()) return cur;
    const bool progress_possible = std::any_of(cur.pending.begin(), cur.pending.end(), [](const Event& e) {
      return !is_breakdown(e.kind);
    });
    const bool in_outage =
        std::any_of(cur.machines.begin(), cur.machines.end(), [](const auto& m) { return m.mode == MachineMode::outage; }) ||
        std::any_of(cur.transports.begin(), cur.transports.end(),
                    [](const auto& t) { return t.mode == TransportMode::outage; });
    if (!progress_possible && !in_outage) throw Error("deadlock: no pending work and no enabled action at t=" + std::to_string(cur.now));
    cur = advance(ctx, cur, cur.pending.front().time);
  }
}

std::optional<Tick> next_decision_time(const SimContext& ctx, const SimState& s) {
  SimState d = advance_to_decision(ctx, s);
  if (is_terminal(d)) return std::nullopt;
  return d.now;
}

bool is_terminal(const SimState& s) {
  return std::all_of(s.jobs.begin(), s.jobs.end(), [](const JobProgress& j) { return j.done; });
}

Tick makespan(const SimState& s) {
  if (!is_terminal(s)) throw Error("makespan requires a terminal state");
  Tick c = 0;
  for (const auto& j : s.jobs)
    for (Tick end : j.op_ends) c = std::max(c, end);
  return c;
}

std::vector<std::string> check_invariants(const SimContext& ctx, const SimState& s) {
  std::vector<std::string> out;
  auto fail = [&](std::string msg) { out.push_back(std::move(msg)); };
  for (std::size_t i = 0; i < s.pending.size(); ++i) {
    if (s.pending[i].time < s.now) fail("queued event before now");
    if (i > 0 && queue_less(s.pending[i], s.pending[i - 1])) fail("queue out of order");
  }

  std::vector<int> seen(static_cast<std::size_t>(ctx.job_count()), 0);
  auto count = [&](int j, const std::string& where) {
    if (j < 0 || j >= ctx.job_count()) fail("unknown job in " + where);
    else ++seen[j];
  };
  for (std::size_t b = 0; b < s.buffers.size(); ++b) {
    const BufferState& buf = s.buffers[b];
    const std::string name = ctx.resource_name(ResourceRef::buffer(static_cast<int>(b)));
    for (int j : buf.slots) count(j, name);
    if (buf.capacity && static_cast<int>(buf.slots.size()) + buf.incoming > *buf.capacity)
      fail("buffer " + name + " over capacity");
    if (buf.incoming < 0) fail("buffer " + name + " has negative reservations");
  }
  for (int m = 0; m < ctx.machine_count(); ++m) {
    const MachineState& ms = s.machines[m];
    const auto mode = ms.mode == MachineMode::outage ? ms.resume_mode : ms.mode;
    const bool holds = mode == MachineMode::setup || mode == MachineMode::working;
    if (holds != (ms.job >= 0)) fail("machine " + ctx.resource_name(ResourceRef::machine(m)) + " job/mode mismatch");
    if (ms.job >= 0) count(ms.job, "machine");
  }
  for (int t = 0; t < ctx.transport_count(); ++t) {
    const TransportState& ts = s.transports[t];
    const std::string name = ctx.resource_name(ResourceRef::transport(t));
    if (static_cast<int>(ts.cargo.size() + ts.reserved.size()) > ctx.instance().transports[t].capacity)
      fail("transport " + name + " over capacity");
    const auto mode = ts.mode == TransportMode::outage ? ts.resume_mode : ts.mode;
    const bool carrying = mode == TransportMode::loading || mode == TransportMode::transit || mode == TransportMode::unloading;
    if (carrying != !ts.cargo.empty()) fail("transport " + name + " cargo/mode mismatch");
    for (int j : ts.cargo) count(j, "transport");
  }
  for (int j = 0; j < ctx.job_count(); ++j) {
    if (seen[j] != 1) fail("job " + ctx.job_name(j) + " appears " + std::to_string(seen[j]) + " times");
    const JobProgress& p = s.jobs[j];
    if (p.done != (p.next_op == ctx.op_count(j))) fail("job " + ctx.job_name(j) + " done flag inconsistent");
    for (int k = 1; k < p.next_op; ++k)
      if (p.op_starts[k] < p.op_ends[k - 1]) fail("job " + ctx.job_name(j) + " violates precedence");
  }
  return out;
}

}  // namespace jsl
