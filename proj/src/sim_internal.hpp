#pragma once

#include <string>
#include <vector>

#include "jobshoplab/sim.hpp"

namespace jsl::detail {

void set_mode(MachineState& m, MachineMode mode, Tick now);
void set_mode(TransportState& t, TransportMode mode, Tick now);

void record(SimState& s, const Event& e, bool derived);

/// Removes the first queued event matching `pred`; returns it if found.
template <class Pred>
std::optional<Event> take_pending(SimState& s, Pred pred) {
  for (auto it = s.pending.begin(); it != s.pending.end(); ++it) {
    if (pred(*it)) {
      Event e = *it;
      s.pending.erase(it);
      return e;
    }
  }
  return std::nullopt;
}

bool remove_slot(BufferState& b, int job);

/// Pre-buffer of the machine running the job's next operation.
int next_pre_buffer(const SimContext& ctx, const SimState& s, int job);
/// Physical location of a job waiting in SOURCE or a post-buffer.
ResourceRef job_location(const JobProgress& j);
/// Waiting in SOURCE or a post-buffer, not yet claimed.
bool awaits_relocation(const SimState& s, int job);

/// Structural moves shared by the transitions and the safety look-ahead.
void move_to_machine(const SimContext& ctx, std::vector<BufferState>& buffers, std::vector<JobProgress>& jobs,
                     int machine, int job);
void claim_destination(const SimContext& ctx, std::vector<BufferState>& buffers, std::vector<JobProgress>& jobs,
                       int job, int claim);
/// Job finishing a non-final operation goes straight into the next pre-buffer.
void move_direct(const SimContext& ctx, std::vector<BufferState>& buffers, std::vector<JobProgress>& jobs, int job);

/// Safety of the state after a hypothetical structural change.
bool safe_after_assign(const SimContext& ctx, const SimState& s, int machine, int job);
bool safe_after_claim(const SimContext& ctx, const SimState& s, int job, int claim);
bool safe_after_direct_move(const SimContext& ctx, const SimState& s, int job);

/// The transition proper, without queue bookkeeping, plug-in hooks or transfers.
void transition(const SimContext& ctx, SimState& s, const Event& e);
/// Queues instantaneous moves for waiting jobs when no transports are simulated.
void schedule_transfers(const SimContext& ctx, SimState& s);
/// Full in-place step: dequeue, transition, plug-ins, transfers, observer.
void step(const SimContext& ctx, SimState& s, const Event& e);

[[noreturn]] void reject(const std::string& reason);

}  // namespace jsl::detail
