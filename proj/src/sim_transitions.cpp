#include <algorithm>
#include <utility>

#include "jobshoplab/errors.hpp"
#include "jobshoplab/plugins.hpp"
#include "sim_internal.hpp"

namespace jsl::detail {

void set_mode(MachineState& m, MachineMode mode, Tick now) {
  m.mode_ticks[static_cast<std::size_t>(m.mode)] += now - m.mode_since;
  m.mode_since = now;
  m.mode = mode;
}

void set_mode(TransportState& t, TransportMode mode, Tick now) {
  t.mode_since = now;
  t.mode = mode;
}

void record(SimState& s, const Event& e, bool derived) {
  s.trace.push_back({s.now, e.kind, e.unit, e.job, e.via, priority(e.kind), e.origin, s.batch, derived});
}

bool remove_slot(BufferState& b, int job) {
  auto it = std::find(b.slots.begin(), b.slots.end(), job);
  if (it == b.slots.end()) return false;
  b.slots.erase(it);
  return true;
}

int next_pre_buffer(const SimContext& ctx, const SimState& s, int job) {
  return pre_buffer(ctx.op_machine(job, s.jobs[job].next_op));
}

ResourceRef job_location(const JobProgress& j) {
  if (j.place.kind == ResourceKind::buffer && j.place.index >= 2) return ResourceRef::machine(buffer_machine(j.place.index));
  return ResourceRef::source();
}

bool awaits_relocation(const SimState& s, int job) {
  const JobProgress& j = s.jobs[job];
  if (j.done || j.claimed_by != kUnclaimed || j.place.kind != ResourceKind::buffer) return false;
  return j.place.index == kSourceBuffer || (j.place.index >= 2 && !is_pre_buffer(j.place.index));
}

void reject(const std::string& reason) { throw InvalidTransition(reason); }

namespace {

Event make(Tick time, EventKind kind, ResourceRef unit, int job, ResourceRef via = {}, ResourceRef owner = {}) {
  Event e;
  e.time = time;
  e.kind = kind;
  e.unit = unit;
  e.job = job;
  e.via = via;
  e.owner = owner;
  return e;
}

Tick realize(const SimContext& ctx, SimState& s, const DurationRequest& req) {
  Tick d = ctx.plugins() ? ctx.plugins()->realize(ctx, s, req) : req.nominal;
  if (req.kind == DurationKind::processing) d = std::max<Tick>(d, 1);
  return std::max<Tick>(d, 0);
}

bool fifo_blocked(const BufferState& b, int job) {
  return b.order == BufferOrder::fifo && (b.slots.empty() || b.slots.front() != job);
}

std::optional<std::string> machine_assign_error(const SimContext& ctx, const SimState& s, int m, int job) {
  if (m < 0 || m >= ctx.machine_count()) return "unknown machine";
  if (job < 0 || job >= ctx.job_count()) return "unknown job";
  const MachineState& ms = s.machines[m];
  if (ms.mode == MachineMode::outage) return "machine in outage";
  if (ms.mode != MachineMode::idle) return "machine busy";
  const JobProgress& j = s.jobs[job];
  if (j.done) return "job already finished";
  if (j.place != ResourceRef::buffer(pre_buffer(m))) return "job not in pre-buffer of machine";
  if (fifo_blocked(s.buffers[pre_buffer(m)], job)) return "job not at front of FIFO buffer";
  if (j.next_op < ctx.op_count(job) - 1 && s.buffers[post_buffer(m)].free() < 1) return "post-buffer full";
  if (!safe_after_assign(ctx, s, m, job)) return "assignment would deadlock bounded buffers";
  return std::nullopt;
}

std::optional<std::string> transport_assign_error(const SimContext& ctx, const SimState& s, int t, int job) {
  if (!ctx.transport_active()) return "transports are not simulated";
  if (t < 0 || t >= ctx.transport_count()) return "unknown transport";
  if (job < 0 || job >= ctx.job_count()) return "unknown job";
  const JobProgress& j = s.jobs[job];
  if (j.done) return "job already finished";
  if (j.claimed_by != kUnclaimed) return "job already claimed";
  if (!awaits_relocation(s, job)) return "job not awaiting transport";
  if (fifo_blocked(s.buffers[j.place.index], job)) return "job not at front of FIFO buffer";
  const TransportState& ts = s.transports[t];
  const int capacity = ctx.instance().transports[t].capacity;
  if (ts.mode == TransportMode::outage) return "transport in outage";
  const bool joins_loading = ts.mode == TransportMode::loading && ts.location == job_location(j) &&
                             static_cast<int>(ts.cargo.size() + ts.reserved.size()) < capacity;
  if (ts.mode != TransportMode::idle && !joins_loading) return "transport busy";
  if (s.buffers[next_pre_buffer(ctx, s, job)].free() < 1) return "destination buffer full";
  if (!safe_after_claim(ctx, s, job, t)) return "assignment would deadlock bounded buffers";
  return std::nullopt;
}

void start_op(const SimContext& ctx, SimState& s, int m, int job, bool derived) {
  record(s, make(s.now, EventKind::MachineStarted, ResourceRef::machine(m), job), derived);
  MachineState& ms = s.machines[m];
  JobProgress& j = s.jobs[job];
  set_mode(ms, MachineMode::working, s.now);
  ms.last_job_type = ctx.job_type(job);
  j.op_starts[static_cast<std::size_t>(j.next_op)] = s.now;
  const Tick d = realize(ctx, s, {DurationKind::processing, ResourceRef::machine(m), job, ctx.op_duration(job, j.next_op)});
  ms.busy_until = s.now + d;
  push_event(s, make(s.now + d, EventKind::MachineCompleted, ResourceRef::machine(m), job, {}, ResourceRef::machine(m)));
}

void require_timer(std::optional<Tick> busy_until, Tick now, const char* what) {
  if (!busy_until || *busy_until != now) reject(std::string(what) + " not due at this time");
}

void on_machine_assign(const SimContext& ctx, SimState& s, const Event& e) {
  const int m = e.unit.index;
  if (auto err = machine_assign_error(ctx, s, m, e.job)) reject(*err);
  record(s, e, false);
  move_to_machine(ctx, s.buffers, s.jobs, m, e.job);
  MachineState& ms = s.machines[m];
  ms.job = e.job;
  record(s, make(s.now, EventKind::BufferGet, ResourceRef::buffer(pre_buffer(m)), e.job, e.unit), true);
  DurationRequest req{DurationKind::setup, e.unit, e.job, 0, ms.last_job_type, ctx.job_type(e.job)};
  const Tick setup = realize(ctx, s, req);
  if (setup > 0) {
    set_mode(ms, MachineMode::setup, s.now);
    ms.busy_until = s.now + setup;
    push_event(s, make(s.now + setup, EventKind::SetupFinished, e.unit, e.job, {}, e.unit));
  } else {
    start_op(ctx, s, m, e.job, true);
  }
}

void check_setup_done(const SimState& s, const Event& e) {
  if (e.unit.kind != ResourceKind::machine) reject("event needs a machine");
  const MachineState& ms = s.machines[e.unit.index];
  if (ms.mode != MachineMode::setup || ms.job != e.job) reject("machine not in setup for this job");
  require_timer(ms.busy_until, s.now, "setup");
}

void on_machine_completed(const SimContext& ctx, SimState& s, const Event& e) {
  if (e.unit.kind != ResourceKind::machine) reject("event needs a machine");
  const int m = e.unit.index;
  MachineState& ms = s.machines[m];
  if (ms.mode != MachineMode::working || ms.job != e.job) reject("machine not working on this job");
  require_timer(ms.busy_until, s.now, "completion");
  record(s, e, false);
  JobProgress& j = s.jobs[e.job];
  j.op_ends[static_cast<std::size_t>(j.next_op)] = s.now;
  set_mode(ms, MachineMode::idle, s.now);
  ms.job = -1;
  ms.busy_until.reset();
  ++j.next_op;
  j.waiting_since = s.now;
  if (j.next_op == ctx.op_count(e.job)) {
    j.done = true;
    j.place = ResourceRef::buffer(kSinkBuffer);
    s.buffers[kSinkBuffer].slots.push_back(e.job);
    record(s, make(s.now, EventKind::JobFinished, ResourceRef::buffer(kSinkBuffer), e.job, e.unit), true);
    return;
  }
  if (!ctx.transport_active()) {
    const int dest = next_pre_buffer(ctx, s, e.job);
    if (s.buffers[dest].free() >= 1 && safe_after_direct_move(ctx, s, e.job)) {
      move_direct(ctx, s.buffers, s.jobs, e.job);
      record(s, make(s.now, EventKind::BufferPut, ResourceRef::buffer(dest), e.job, e.unit), true);
      return;
    }
  }
  if (j.holds_post) {
    --s.buffers[post_buffer(m)].incoming;
    j.holds_post = false;
  }
  s.buffers[post_buffer(m)].slots.push_back(e.job);
  j.place = ResourceRef::buffer(post_buffer(m));
  record(s, make(s.now, EventKind::BufferPut, j.place, e.job, e.unit), true);
}

void load_job(SimState& s, int t, int job) {
  JobProgress& j = s.jobs[job];
  const ResourceRef from = j.place;
  remove_slot(s.buffers[from.index], job);
  s.transports[t].cargo.push_back(job);
  j.place = ResourceRef::transport(t);
  record(s, make(s.now, EventKind::BufferGet, from, job, ResourceRef::transport(t)), true);
}

void depart(const SimContext& ctx, SimState& s, int t) {
  TransportState& ts = s.transports[t];
  const int head = ts.cargo.front();
  const ResourceRef dest = ResourceRef::machine(ctx.op_machine(head, s.jobs[head].next_op));
  const ResourceRef unit = ResourceRef::transport(t);
  if (dest == ts.location) {
    set_mode(ts, TransportMode::unloading, s.now);
    const Tick unload = ctx.instance().transports[t].unload_time;
    ts.busy_until = s.now + unload;
    push_event(s, make(s.now + unload, EventKind::BufferPut, ResourceRef::buffer(pre_buffer(dest.index)), head, unit, unit));
    return;
  }
  set_mode(ts, TransportMode::transit, s.now);
  const Tick d = realize(ctx, s, {DurationKind::travel, unit, head, ctx.travel(ts.location, dest)});
  ts.busy_until = s.now + d;
  push_event(s, make(s.now + d, EventKind::TransportDelivered, unit, head, dest, unit));
}

void on_transport_assign(const SimContext& ctx, SimState& s, const Event& e) {
  const int t = e.unit.index;
  if (auto err = transport_assign_error(ctx, s, t, e.job)) reject(*err);
  record(s, e, false);
  claim_destination(ctx, s.buffers, s.jobs, e.job, t);
  TransportState& ts = s.transports[t];
  if (ts.mode == TransportMode::loading) {
    load_job(s, t, e.job);
    take_pending(s, [&](const Event& p) { return p.kind == EventKind::TransportLoaded && p.unit == e.unit; });
    const Tick load = ctx.instance().transports[t].load_time;
    ts.busy_until = s.now + load;
    push_event(s, make(s.now + load, EventKind::TransportLoaded, e.unit, ts.cargo.front(), {}, e.unit));
    return;
  }
  ts.reserved = {e.job};
  set_mode(ts, TransportMode::to_pickup, s.now);
  const ResourceRef pickup = job_location(s.jobs[e.job]);
  const Tick d = realize(ctx, s, {DurationKind::travel, e.unit, e.job, ctx.travel(ts.location, pickup)});
  ts.busy_until = s.now + d;
  push_event(s, make(s.now + d, EventKind::TransportArrivePickup, e.unit, e.job, pickup, e.unit));
}

TransportState& due_transport(SimState& s, const Event& e, TransportMode mode) {
  if (e.unit.kind != ResourceKind::transport) reject("event needs a transport");
  TransportState& ts = s.transports[e.unit.index];
  if (ts.mode != mode) reject("transport is " + std::string(to_string(ts.mode)) + ", expected " + std::string(to_string(mode)));
  require_timer(ts.busy_until, s.now, "transport step");
  return ts;
}

void on_arrive_pickup(const SimContext& ctx, SimState& s, const Event& e) {
  TransportState& ts = due_transport(s, e, TransportMode::to_pickup);
  record(s, e, false);
  ts.location = e.via;
  const auto reserved = std::exchange(ts.reserved, {});
  for (int job : reserved) load_job(s, e.unit.index, job);
  TransportState& t = s.transports[e.unit.index];
  set_mode(t, TransportMode::loading, s.now);
  const Tick load = ctx.instance().transports[e.unit.index].load_time;
  t.busy_until = s.now + load;
  push_event(s, make(s.now + load, EventKind::TransportLoaded, e.unit, t.cargo.front(), {}, e.unit));
}

void on_loaded(const SimContext& ctx, SimState& s, const Event& e) {
  due_transport(s, e, TransportMode::loading);
  record(s, e, false);
  depart(ctx, s, e.unit.index);
}

void on_delivered(const SimContext& ctx, SimState& s, const Event& e) {
  TransportState& ts = due_transport(s, e, TransportMode::transit);
  record(s, e, false);
  ts.location = e.via;
  depart(ctx, s, e.unit.index);
}

void on_buffer_put(const SimContext& ctx, SimState& s, const Event& e) {
  if (e.unit.kind != ResourceKind::buffer || e.unit.index < 0 || e.unit.index >= static_cast<int>(s.buffers.size()))
    reject("event needs a buffer");
  if (e.job < 0 || e.job >= ctx.job_count()) reject("unknown job");
  BufferState& dest = s.buffers[e.unit.index];
  JobProgress& j = s.jobs[e.job];
  if (dest.capacity && static_cast<int>(dest.slots.size()) >= *dest.capacity) reject("buffer full");
  if (e.via.kind == ResourceKind::transport) {
    TransportState& ts = s.transports[e.via.index];
    if (ts.mode != TransportMode::unloading || ts.cargo.empty() || ts.cargo.front() != e.job)
      reject("job is not being unloaded by this transport");
    require_timer(ts.busy_until, s.now, "unloading");
    record(s, e, false);
    ts.cargo.erase(ts.cargo.begin());
    --dest.incoming;
  } else if (e.via.kind == ResourceKind::buffer) {
    if (j.place != e.via || j.claimed_by != kTransferClaim) reject("job has no transfer from this buffer");
    record(s, e, false);
    remove_slot(s.buffers[e.via.index], e.job);
    --dest.incoming;
  } else {
    reject("buffer put without a source");
  }
  dest.slots.push_back(e.job);
  j.place = e.unit;
  j.claimed_by = kUnclaimed;
  j.waiting_since = s.now;
  if (e.via.kind == ResourceKind::transport) {
    TransportState& ts = s.transports[e.via.index];
    if (ts.cargo.empty()) {
      set_mode(ts, TransportMode::idle, s.now);
      ts.busy_until.reset();
    } else {
      depart(ctx, s, e.via.index);
    }
  }
}

void on_breakdown(SimState& s, const Event& e) {
  auto suspend = [&](auto& unit, auto outage) {
    if (unit.mode == outage) reject("resource already in outage");
    record(s, e, false);
    unit.suspended = take_pending(s, [&](const Event& p) { return p.owner == e.unit; });
    if (unit.suspended) unit.suspended->time -= s.now;
    unit.resume_mode = unit.mode;
    set_mode(unit, outage, s.now);
  };
  if (e.unit.kind == ResourceKind::machine) suspend(s.machines[e.unit.index], MachineMode::outage);
  else if (e.unit.kind == ResourceKind::transport) suspend(s.transports[e.unit.index], TransportMode::outage);
  else reject("breakdown needs a machine or transport");
}

void on_repair(SimState& s, const Event& e) {
  auto resume = [&](auto& unit, auto outage) {
    if (unit.mode != outage) reject("resource not in outage");
    record(s, e, false);
    set_mode(unit, unit.resume_mode, s.now);
    if (unit.suspended) {
      Event resumed = *std::exchange(unit.suspended, std::nullopt);
      resumed.time += s.now;
      unit.busy_until = resumed.time;
      push_event(s, resumed);
    }
  };
  if (e.unit.kind == ResourceKind::machine) resume(s.machines[e.unit.index], MachineMode::outage);
  else if (e.unit.kind == ResourceKind::transport) resume(s.transports[e.unit.index], TransportMode::outage);
  else reject("repair needs a machine or transport");
}

}  // namespace

void transition(const SimContext& ctx, SimState& s, const Event& e) {
  switch (e.kind) {
    case EventKind::MachineAssign:
      if (e.unit.kind != ResourceKind::machine) reject("event needs a machine");
      on_machine_assign(ctx, s, e);
      break;
    case EventKind::TransportAssign:
      if (e.unit.kind != ResourceKind::transport) reject("event needs a transport");
      on_transport_assign(ctx, s, e);
      break;
    case EventKind::SetupFinished:
      check_setup_done(s, e);
      record(s, e, false);
      start_op(ctx, s, e.unit.index, e.job, true);
      break;
    case EventKind::MachineStarted:
      check_setup_done(s, e);
      take_pending(s, [&](const Event& p) { return p.kind == EventKind::SetupFinished && p.unit == e.unit; });
      start_op(ctx, s, e.unit.index, e.job, false);
      break;
    case EventKind::MachineCompleted: on_machine_completed(ctx, s, e); break;
    case EventKind::TransportArrivePickup: on_arrive_pickup(ctx, s, e); break;
    case EventKind::TransportLoaded: on_loaded(ctx, s, e); break;
    case EventKind::TransportDelivered: on_delivered(ctx, s, e); break;
    case EventKind::BufferPut: on_buffer_put(ctx, s, e); break;
    case EventKind::BreakdownStart: on_breakdown(s, e); break;
    case EventKind::RepairComplete: on_repair(s, e); break;
    case EventKind::BufferGet:
    case EventKind::JobFinished: reject(std::string(to_string(e.kind)) + " is only recorded as a consequence");
  }
}

void schedule_transfers(const SimContext& ctx, SimState& s) {
  if (ctx.transport_active()) return;
  for (int b = 0; b < static_cast<int>(s.buffers.size()); ++b) {
    if (b == kSinkBuffer || is_pre_buffer(b)) continue;
    const auto slots = s.buffers[b].slots;
    const bool fifo = s.buffers[b].order == BufferOrder::fifo;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (fifo && i > 0) break;
      const int job = slots[i];
      if (!awaits_relocation(s, job)) continue;
      const int dest = next_pre_buffer(ctx, s, job);
      if (s.buffers[dest].free() < 1 || !safe_after_claim(ctx, s, job, kTransferClaim)) continue;
      claim_destination(ctx, s.buffers, s.jobs, job, kTransferClaim);
      push_event(s, make(s.now, EventKind::BufferPut, ResourceRef::buffer(dest), job, ResourceRef::buffer(b)));
    }
  }
}

void step(const SimContext& ctx, SimState& s, const Event& e) {
  if (e.seq != 0) take_pending(s, [&](const Event& p) { return p == e; });
  transition(ctx, s, e);
  if (ctx.plugins()) ctx.plugins()->on_event(ctx, s, e);
  schedule_transfers(ctx, s);
  if (ctx.observer()) ctx.observer()(s, e);
}

}  // namespace jsl::detail

namespace jsl {

std::optional<std::string> agent_event_error(const SimContext& ctx, const SimState& s, const Event& e) {
  switch (e.kind) {
    case EventKind::MachineAssign:
      if (e.unit.kind != ResourceKind::machine) return "event needs a machine";
      return detail::machine_assign_error(ctx, s, e.unit.index, e.job);
    case EventKind::TransportAssign:
      if (e.unit.kind != ResourceKind::transport) return "event needs a transport";
      return detail::transport_assign_error(ctx, s, e.unit.index, e.job);
    default: return std::string(to_string(e.kind)) + " is not an agent event";
  }
}

}  // namespace jsl
