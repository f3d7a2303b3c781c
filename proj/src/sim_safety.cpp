// Deadlock avoidance for bounded buffers.
//
// Every job holds some buffer slots (its current slot plus reservations) and
// still has to pass through the buffers on its remaining route. A state is
// safe when the jobs can be retired one by one, each retiring job being able
// to walk its route alone while the others stay frozen. Only moves that keep
// the state safe are allowed, so some job can always make progress.

#include <algorithm>

#include "sim_internal.hpp"

namespace jsl::detail {

namespace {

constexpr int kUnbounded = 1 << 30;

struct JobHold {
  std::vector<int> held;
  std::vector<int> route;
  int slot_buffer = -1;
  bool active = false;
};

void append_route(const SimContext& ctx, int job, int from_op, std::vector<int>& out) {
  const int last = ctx.op_count(job) - 1;
  for (int k = from_op; k <= last; ++k) {
    out.push_back(pre_buffer(ctx.op_machine(job, k)));
    if (k < last) out.push_back(post_buffer(ctx.op_machine(job, k)));
  }
}

JobHold holdings(const SimContext& ctx, const JobProgress& j, int job) {
  JobHold h;
  if (j.done) return h;
  h.active = true;
  const int k = j.next_op;
  const int last = ctx.op_count(job) - 1;
  const int m = ctx.op_machine(job, k);
  auto after_pre = [&] {
    if (k < last) h.route.push_back(post_buffer(m));
    append_route(ctx, job, k + 1, h.route);
  };
  switch (j.place.kind) {
    case ResourceKind::buffer:
      h.slot_buffer = j.place.index;
      h.held.push_back(j.place.index);
      if (j.place.index == pre_buffer(m)) {
        after_pre();
      } else if (j.claimed_by != kUnclaimed) {
        h.held.push_back(pre_buffer(m));
        after_pre();
      } else {
        append_route(ctx, job, k, h.route);
      }
      break;
    case ResourceKind::machine:
      if (j.holds_post) h.held.push_back(post_buffer(m));
      append_route(ctx, job, k + 1, h.route);
      break;
    case ResourceKind::transport:
      h.held.push_back(pre_buffer(m));
      after_pre();
      break;
    default: break;
  }
  return h;
}

bool safe(const SimContext& ctx, const std::vector<BufferState>& buffers, const std::vector<JobProgress>& jobs) {
  if (!ctx.bounded_buffers()) return true;
  const int nb = static_cast<int>(buffers.size());
  std::vector<int> free(static_cast<std::size_t>(nb));
  std::vector<int> holders(static_cast<std::size_t>(nb), 0);
  for (int b = 0; b < nb; ++b) free[b] = buffers[b].capacity ? buffers[b].free() : kUnbounded;

  std::vector<JobHold> hold;
  hold.reserve(jobs.size());
  int remaining = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    hold.push_back(holdings(ctx, jobs[i], static_cast<int>(i)));
    if (!hold.back().active) continue;
    ++remaining;
    for (int b : hold.back().held) ++holders[b];
  }

  auto holds = [](const JobHold& h, int b) { return std::count(h.held.begin(), h.held.end(), b) > 0; };

  auto can_finish = [&](int i) {
    const JobHold& h = hold[i];
    if (h.slot_buffer >= 0 && buffers[h.slot_buffer].order == BufferOrder::fifo) {
      for (int other : buffers[h.slot_buffer].slots) {
        if (other == i) break;
        if (hold[other].active) return false;
      }
    }
    for (int b : h.route) {
      const int own = holds(h, b) ? 1 : 0;
      if (buffers[b].capacity && free[b] + own < 1) return false;
      if (buffers[b].order == BufferOrder::fifo && holders[b] - own > 0) return false;
    }
    return true;
  };

  bool changed = true;
  while (changed && remaining > 0) {
    changed = false;
    for (std::size_t i = 0; i < hold.size(); ++i) {
      if (!hold[i].active || !can_finish(static_cast<int>(i))) continue;
      for (int b : hold[i].held) {
        if (buffers[b].capacity) ++free[b];
        --holders[b];
      }
      hold[i].active = false;
      --remaining;
      changed = true;
    }
  }
  return remaining == 0;
}

}  // namespace

void move_to_machine(const SimContext& ctx, std::vector<BufferState>& buffers, std::vector<JobProgress>& jobs,
                     int machine, int job) {
  JobProgress& j = jobs[job];
  remove_slot(buffers[pre_buffer(machine)], job);
  j.place = ResourceRef::machine(machine);
  if (j.next_op < ctx.op_count(job) - 1) {
    ++buffers[post_buffer(machine)].incoming;
    j.holds_post = true;
  }
}

void claim_destination(const SimContext& ctx, std::vector<BufferState>& buffers, std::vector<JobProgress>& jobs,
                       int job, int claim) {
  jobs[job].claimed_by = claim;
  ++buffers[pre_buffer(ctx.op_machine(job, jobs[job].next_op))].incoming;
}

void move_direct(const SimContext& ctx, std::vector<BufferState>& buffers, std::vector<JobProgress>& jobs, int job) {
  JobProgress& j = jobs[job];
  if (j.holds_post) {
    --buffers[post_buffer(j.place.index)].incoming;
    j.holds_post = false;
  }
  const int dest = pre_buffer(ctx.op_machine(job, j.next_op));
  buffers[dest].slots.push_back(job);
  j.place = ResourceRef::buffer(dest);
}

bool safe_after_assign(const SimContext& ctx, const SimState& s, int machine, int job) {
  if (!ctx.bounded_buffers()) return true;
  auto buffers = s.buffers;
  auto jobs = s.jobs;
  move_to_machine(ctx, buffers, jobs, machine, job);
  return safe(ctx, buffers, jobs);
}

bool safe_after_claim(const SimContext& ctx, const SimState& s, int job, int claim) {
  if (!ctx.bounded_buffers()) return true;
  auto buffers = s.buffers;
  auto jobs = s.jobs;
  claim_destination(ctx, buffers, jobs, job, claim);
  return safe(ctx, buffers, jobs);
}

bool safe_after_direct_move(const SimContext& ctx, const SimState& s, int job) {
  if (!ctx.bounded_buffers()) return true;
  auto buffers = s.buffers;
  auto jobs = s.jobs;
  move_direct(ctx, buffers, jobs, job);
  return safe(ctx, buffers, jobs);
}

}  // namespace jsl::detail

namespace jsl {

bool is_safe(const SimContext& ctx, const SimState& s) { return detail::safe(ctx, s.buffers, s.jobs); }

}  // namespace jsl
