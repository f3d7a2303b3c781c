#include <algorithm>
#include <map>

#include "jobshoplab/bench.hpp"
#include "jobshoplab/errors.hpp"

namespace jsl {

namespace {

// Replays records against plain bookkeeping built from the instance alone.
class Replay {
 public:
  Replay(const Instance& inst, bool transport, bool limits) : inst_(inst), transport_(transport) {
    for (std::size_t m = 0; m < inst.machines.size(); ++m) machine_of_[inst.machines[m].id] = static_cast<int>(m);
    const int buffers = 2 + 2 * static_cast<int>(inst.machines.size());
    buffers_.resize(static_cast<std::size_t>(buffers));
    for (std::size_t m = 0; m < inst.machines.size(); ++m) {
      const auto& spec = inst.machines[m];
      auto& pre = buffers_[static_cast<std::size_t>(pre_buffer(static_cast<int>(m)))];
      auto& post = buffers_[static_cast<std::size_t>(post_buffer(static_cast<int>(m)))];
      if (limits) {
        pre.capacity = spec.pre_buffer_capacity;
        post.capacity = spec.post_buffer_capacity;
        pre.fifo = post.fifo = spec.buffer_order == BufferOrder::fifo;
      }
    }
    jobs_.resize(inst.jobs.size());
    for (std::size_t j = 0; j < inst.jobs.size(); ++j) {
      for (const auto& op : inst.jobs[j].ops) jobs_[j].route.push_back(machine_of_.at(op.machine));
      buffers_[kSourceBuffer].slots.push_back(static_cast<int>(j));
    }
    machines_.resize(inst.machines.size());
    transports_.resize(inst.transports.size());
  }

  void apply(const TraceRecord& r, std::size_t i) {
    index_ = i;
    time_ = r.time;
    check_order(r);
    if (r.job >= static_cast<int>(jobs_.size())) return fail("teleport", "unknown job index");
    switch (r.kind) {
      case EventKind::MachineAssign: return on_assign(r);
      case EventKind::SetupFinished: return on_setup_finished(r);
      case EventKind::MachineStarted: return on_started(r);
      case EventKind::MachineCompleted: return on_completed(r);
      case EventKind::BufferGet: return on_get(r);
      case EventKind::BufferPut: return on_put(r);
      case EventKind::TransportAssign: return on_transport_busy(r);
      case EventKind::TransportArrivePickup:
      case EventKind::TransportDelivered:
        on_transport_busy(r);
        if (r.via) transports_[idx(r.unit)].location = r.via;
        return;
      case EventKind::TransportLoaded: return on_transport_busy(r);
      case EventKind::BreakdownStart:
      case EventKind::RepairComplete: return on_outage(r);
      case EventKind::JobFinished: return on_finished(r);
    }
  }

  std::vector<Violation> take() { return std::move(out_); }

 private:
  struct Buf {
    std::vector<int> slots;
    std::optional<int> capacity;
    bool fifo = false;
  };
  struct Job {
    std::vector<int> route;
    int next_op = 0;
    Tick last_end = 0;
    ResourceRef at = ResourceRef::buffer(kSourceBuffer);
    bool finished = false;
  };
  struct Machine {
    int occupant = -1;
    bool working = false;
    Tick started = 0;
    bool outage = false;
  };
  struct Transport {
    std::vector<int> cargo;
    ResourceRef location = ResourceRef::source();
    bool outage = false;
  };

  static std::size_t idx(ResourceRef r) { return static_cast<std::size_t>(r.index); }

  void fail(const std::string& kind, const std::string& what) {
    out_.push_back({kind, "record " + std::to_string(index_) + " (t=" + std::to_string(time_) + "): " + what});
  }

  std::string job_id(int j) const { return j >= 0 ? inst_.jobs[static_cast<std::size_t>(j)].id : "?"; }
  std::string machine_id(int m) const { return inst_.machines[static_cast<std::size_t>(m)].id; }

  std::optional<int> next_machine(int j) const {
    const Job& job = jobs_[static_cast<std::size_t>(j)];
    if (job.next_op >= static_cast<int>(job.route.size())) return std::nullopt;
    return job.route[static_cast<std::size_t>(job.next_op)];
  }

  bool valid(ResourceRef r, ResourceKind k) const {
    if (r.kind != k || r.index < 0) return false;
    switch (k) {
      case ResourceKind::machine: return r.index < static_cast<int>(machines_.size());
      case ResourceKind::transport: return r.index < static_cast<int>(transports_.size());
      case ResourceKind::buffer: return r.index < static_cast<int>(buffers_.size());
      default: return true;
    }
  }

  void check_order(const TraceRecord& r) {
    if (r.priority != priority(r.kind)) fail("ordering", std::string(to_string(r.kind)) + " carries a wrong priority");
    if (has_prev_) {
      if (r.time < prev_time_) {
        fail("ordering", "time runs backwards from " + std::to_string(prev_time_));
      } else if (r.time == prev_time_) {
        if (is_breakdown(r.kind) && non_breakdown_seen_)
          fail("ordering", "outage record after other records of the same tick");
        if (!r.derived && r.batch == prev_batch_ && have_primary_ && r.priority > last_primary_)
          fail("ordering", std::string(to_string(r.kind)) + " applied after a lower-priority event");
      }
    }
    if (!has_prev_ || r.time != prev_time_) non_breakdown_seen_ = false;
    if (!has_prev_ || r.batch != prev_batch_ || r.time != prev_time_) have_primary_ = false;
    if (!is_breakdown(r.kind)) non_breakdown_seen_ = true;
    if (!r.derived) {
      have_primary_ = true;
      last_primary_ = r.priority;
    }
    has_prev_ = true;
    prev_time_ = r.time;
    prev_batch_ = r.batch;
  }

  void on_assign(const TraceRecord& r) {
    if (!valid(r.unit, ResourceKind::machine) || r.job < 0) return fail("overlap", "malformed machine assignment");
    Machine& m = machines_[idx(r.unit)];
    if (m.outage) fail("overlap", "assignment to " + machine_id(r.unit.index) + " during an outage");
    if (m.occupant >= 0) fail("overlap", machine_id(r.unit.index) + " already holds " + job_id(m.occupant));
    if (next_machine(r.job) != r.unit.index)
      fail("precedence", job_id(r.job) + " is not due on " + machine_id(r.unit.index));
    m.occupant = r.job;
  }

  void on_setup_finished(const TraceRecord& r) {
    if (!valid(r.unit, ResourceKind::machine)) return fail("overlap", "malformed setup record");
    if (machines_[idx(r.unit)].occupant != r.job) fail("overlap", "setup finished for a job not on the machine");
  }

  void on_started(const TraceRecord& r) {
    if (!valid(r.unit, ResourceKind::machine) || r.job < 0) return fail("overlap", "malformed start record");
    Machine& m = machines_[idx(r.unit)];
    Job& j = jobs_[static_cast<std::size_t>(r.job)];
    if (m.outage) fail("overlap", machine_id(r.unit.index) + " starts work during an outage");
    if (m.working) fail("overlap", machine_id(r.unit.index) + " starts " + job_id(r.job) + " while processing " + job_id(m.occupant));
    if (m.occupant >= 0 && m.occupant != r.job)
      fail("overlap", machine_id(r.unit.index) + " starts " + job_id(r.job) + " but holds " + job_id(m.occupant));
    if (next_machine(r.job) != r.unit.index)
      fail("precedence", job_id(r.job) + " operation " + std::to_string(j.next_op) + " is not on " + machine_id(r.unit.index));
    if (r.time < j.last_end) fail("precedence", job_id(r.job) + " starts before its previous operation ends");
    if (j.at != r.unit) fail("teleport", job_id(r.job) + " is not at " + machine_id(r.unit.index));
    m.occupant = r.job;
    m.working = true;
    m.started = r.time;
    j.at = r.unit;
  }

  void on_completed(const TraceRecord& r) {
    if (!valid(r.unit, ResourceKind::machine) || r.job < 0) return fail("overlap", "malformed completion record");
    Machine& m = machines_[idx(r.unit)];
    Job& j = jobs_[static_cast<std::size_t>(r.job)];
    if (m.outage) fail("overlap", machine_id(r.unit.index) + " completes work during an outage");
    if (!m.working || m.occupant != r.job) {
      fail("overlap", machine_id(r.unit.index) + " completes " + job_id(r.job) + " which it is not processing");
    } else if (r.time <= m.started) {
      fail("overlap", "zero-length operation of " + job_id(r.job));
    }
    m.working = false;
    m.occupant = -1;
    j.last_end = r.time;
    ++j.next_op;
    j.at = r.unit;
  }

  /// Location a buffer belongs to: SOURCE or its machine.
  static ResourceRef buffer_location(int b) {
    return b >= 2 ? ResourceRef::machine(buffer_machine(b)) : ResourceRef::source();
  }

  bool take_from(Buf& b, int job, const std::string& name) {
    auto it = std::find(b.slots.begin(), b.slots.end(), job);
    if (it == b.slots.end()) {
      fail("teleport", job_id(job) + " taken from " + name + " where it is not stored");
      return false;
    }
    if (b.fifo && it != b.slots.begin()) fail("ordering", job_id(job) + " overtakes " + job_id(b.slots.front()) + " in " + name);
    b.slots.erase(it);
    return true;
  }

  std::string buffer_name(int b) const {
    if (b == kSourceBuffer) return "SOURCE";
    if (b == kSinkBuffer) return "SINK";
    return machine_id(buffer_machine(b)) + (is_pre_buffer(b) ? ".pre" : ".post");
  }

  void on_get(const TraceRecord& r) {
    if (!valid(r.unit, ResourceKind::buffer) || r.job < 0) return fail("teleport", "malformed buffer retrieval");
    const int b = r.unit.index;
    Job& j = jobs_[static_cast<std::size_t>(r.job)];
    take_from(buffers_[idx(r.unit)], r.job, buffer_name(b));
    if (valid(r.via, ResourceKind::machine)) {
      if (b != pre_buffer(r.via.index)) fail("teleport", machine_id(r.via.index) + " takes " + job_id(r.job) + " from " + buffer_name(b));
      j.at = r.via;
    } else if (valid(r.via, ResourceKind::transport)) {
      Transport& t = transports_[idx(r.via)];
      if (t.location != buffer_location(b))
        fail("teleport", inst_.transports[idx(r.via)].id + " loads " + job_id(r.job) + " away from " + buffer_name(b));
      t.cargo.push_back(r.job);
      if (static_cast<int>(t.cargo.size()) > inst_.transports[idx(r.via)].capacity)
        fail("capacity", inst_.transports[idx(r.via)].id + " carries more than its capacity");
      j.at = r.via;
    } else {
      fail("teleport", "buffer retrieval without a taker");
    }
  }

  void on_put(const TraceRecord& r) {
    if (!valid(r.unit, ResourceKind::buffer) || r.job < 0) return fail("teleport", "malformed buffer placement");
    const int b = r.unit.index;
    Job& j = jobs_[static_cast<std::size_t>(r.job)];
    const auto next = next_machine(r.job);
    const bool into_next_pre = next && b == pre_buffer(*next);

    if (valid(r.via, ResourceKind::machine)) {
      const int m = r.via.index;
      if (j.at != r.via || machines_[idx(r.via)].working)
        fail("teleport", job_id(r.job) + " leaves " + machine_id(m) + " without having finished there");
      const bool ok = b == post_buffer(m) || (!transport_ && into_next_pre);
      if (!ok) fail("teleport", job_id(r.job) + " moves from " + machine_id(m) + " straight to " + buffer_name(b));
    } else if (valid(r.via, ResourceKind::transport)) {
      Transport& t = transports_[idx(r.via)];
      auto it = std::find(t.cargo.begin(), t.cargo.end(), r.job);
      if (it == t.cargo.end()) {
        fail("teleport", inst_.transports[idx(r.via)].id + " unloads " + job_id(r.job) + " which it does not carry");
      } else {
        t.cargo.erase(it);
      }
      if (t.location != buffer_location(b))
        fail("teleport", inst_.transports[idx(r.via)].id + " unloads at " + buffer_name(b) + " without travelling there");
      if (!into_next_pre) fail("precedence", job_id(r.job) + " delivered to " + buffer_name(b) + " out of route order");
    } else if (valid(r.via, ResourceKind::buffer)) {
      if (transport_) fail("teleport", job_id(r.job) + " moves between buffers without a transport");
      if (j.at != r.via) fail("teleport", job_id(r.job) + " is not in " + buffer_name(r.via.index));
      take_from(buffers_[idx(r.via)], r.job, buffer_name(r.via.index));
      if (!into_next_pre) fail("precedence", job_id(r.job) + " moved to " + buffer_name(b) + " out of route order");
    } else {
      fail("teleport", "buffer placement without a giver");
    }

    Buf& dest = buffers_[idx(r.unit)];
    dest.slots.push_back(r.job);
    j.at = r.unit;
    if (dest.capacity && static_cast<int>(dest.slots.size()) > *dest.capacity)
      fail("capacity", buffer_name(b) + " holds " + std::to_string(dest.slots.size()) + " jobs, capacity " +
                           std::to_string(*dest.capacity));
  }

  void on_transport_busy(const TraceRecord& r) {
    if (!valid(r.unit, ResourceKind::transport)) return fail("teleport", "malformed transport record");
    if (transports_[idx(r.unit)].outage && r.kind != EventKind::TransportAssign)
      fail("overlap", inst_.transports[idx(r.unit)].id + " operates during an outage");
  }

  void on_outage(const TraceRecord& r) {
    bool* flag = nullptr;
    if (valid(r.unit, ResourceKind::machine)) flag = &machines_[idx(r.unit)].outage;
    if (valid(r.unit, ResourceKind::transport)) flag = &transports_[idx(r.unit)].outage;
    if (!flag) return fail("ordering", "outage record for an unknown resource");
    const bool start = r.kind == EventKind::BreakdownStart;
    if (*flag == start) fail("ordering", start ? "breakdown during an outage" : "repair without a breakdown");
    *flag = start;
  }

  void on_finished(const TraceRecord& r) {
    if (r.job < 0) return fail("precedence", "malformed completion record");
    Job& j = jobs_[static_cast<std::size_t>(r.job)];
    if (j.finished) fail("precedence", job_id(r.job) + " finishes twice");
    if (j.next_op != static_cast<int>(j.route.size())) fail("precedence", job_id(r.job) + " finishes with operations left");
    if (j.at.kind != ResourceKind::machine && j.at != ResourceRef::buffer(kSinkBuffer))
      fail("teleport", job_id(r.job) + " reaches SINK from " + (j.at.kind == ResourceKind::buffer ? buffer_name(j.at.index) : "a transport"));
    j.finished = true;
    j.at = ResourceRef::buffer(kSinkBuffer);
  }

  const Instance& inst_;
  bool transport_;
  std::map<std::string, int> machine_of_;
  std::vector<Buf> buffers_;
  std::vector<Job> jobs_;
  std::vector<Machine> machines_;
  std::vector<Transport> transports_;
  std::vector<Violation> out_;
  std::size_t index_ = 0;
  Tick time_ = 0;
  bool has_prev_ = false;
  Tick prev_time_ = 0;
  std::uint64_t prev_batch_ = 0;
  bool non_breakdown_seen_ = false;
  bool have_primary_ = false;
  double last_primary_ = 0;
};

bool transport_kind(EventKind k) {
  return k == EventKind::TransportAssign || k == EventKind::TransportArrivePickup || k == EventKind::TransportLoaded ||
         k == EventKind::TransportDelivered;
}

}  // namespace

std::vector<Violation> validate_trace(const Instance& inst, const std::vector<TraceRecord>& trace,
                                      const ValidateOptions& opts) {
  const bool transport = opts.transport_active.value_or(
      std::any_of(trace.begin(), trace.end(), [](const TraceRecord& r) { return transport_kind(r.kind); }));
  Replay replay(inst, transport, opts.buffer_limits);
  for (std::size_t i = 0; i < trace.size(); ++i) replay.apply(trace[i], i);
  return replay.take();
}

std::vector<Violation> validate_trace(const Instance& inst, const std::vector<NamedRecord>& trace,
                                      const ValidateOptions& opts) {
  const SimContext ctx(inst);
  return validate_trace(inst, resolve_records(ctx, trace), opts);
}

}  // namespace jsl
