#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "jobshoplab/event.hpp"
#include "jobshoplab/instance.hpp"
#include "jobshoplab/rng.hpp"

namespace jsl {

enum class MachineMode : std::uint8_t { idle, setup, working, outage };
inline constexpr int kMachineModes = 4;

enum class TransportMode : std::uint8_t { idle, to_pickup, loading, transit, unloading, outage };

std::string_view to_string(MachineMode m);
std::string_view to_string(TransportMode m);

struct MachineState {
  MachineMode mode = MachineMode::idle;
  int job = -1;
  int last_job_type = -1;  // -1 = NEUTRAL
  Tick mode_since = 0;
  std::optional<Tick> busy_until;
  MachineMode resume_mode = MachineMode::idle;
  std::optional<Event> suspended;  // time holds the remaining ticks while in outage
  std::array<Tick, kMachineModes> mode_ticks{};  // closed intervals only

  bool operator==(const MachineState&) const = default;
};

struct TransportState {
  TransportMode mode = TransportMode::idle;
  std::vector<int> cargo;
  std::vector<int> reserved;  // assigned, not yet picked up
  ResourceRef location = ResourceRef::source();
  std::optional<Tick> busy_until;
  TransportMode resume_mode = TransportMode::idle;
  std::optional<Event> suspended;
  Tick mode_since = 0;

  bool operator==(const TransportState&) const = default;
};

struct BufferState {
  std::vector<int> slots;
  std::optional<int> capacity;  // nullopt = unbounded
  BufferOrder order = BufferOrder::any;
  int incoming = 0;  // slots promised to jobs on their way in

  /// Unreserved room; large when unbounded.
  int free() const noexcept {
    return capacity ? *capacity - static_cast<int>(slots.size()) - incoming : 1 << 30;
  }
  bool operator==(const BufferState&) const = default;
};

/// Claim markers on JobProgress::claimed_by besides a transport index.
inline constexpr int kUnclaimed = -1;
inline constexpr int kTransferClaim = -2;

struct JobProgress {
  int next_op = 0;
  std::vector<Tick> op_starts;  // Z_{i,j}
  std::vector<Tick> op_ends;    // C_{i,j}
  bool done = false;
  ResourceRef place = ResourceRef::buffer(kSourceBuffer);
  int claimed_by = kUnclaimed;
  bool holds_post = false;  // post-buffer slot reserved for the running op
  Tick waiting_since = 0;

  bool operator==(const JobProgress&) const = default;
};

enum class DurationKind : std::uint8_t { processing, setup, travel };

struct DurationSample {
  DurationKind kind = DurationKind::processing;
  ResourceRef unit;
  int job = -1;
  Tick nominal = 0;
  Tick realized = 0;

  bool operator==(const DurationSample&) const = default;
};

/// Auxiliary plug-in accumulators. All counters only grow during an episode.
struct PluginOutput {
  std::vector<std::array<Tick, kMachineModes>> consumption_ticks;  // per machine, per mode
  std::vector<std::int64_t> breakdowns;                            // machines, then transports
  std::vector<DurationSample> samples;
  std::int64_t setups_inserted = 0;
  Tick setup_ticks = 0;

  bool operator==(const PluginOutput&) const = default;
};

struct SimState {
  Tick now = 0;
  std::vector<MachineState> machines;
  std::vector<TransportState> transports;
  std::vector<BufferState> buffers;
  std::vector<JobProgress> jobs;
  std::vector<Event> pending;  // sorted by (time, seq)
  std::uint64_t next_seq = 1;
  std::uint64_t batch = 0;
  std::uint64_t seed = 0;
  RngStreams rng;
  PluginOutput plugin_output;
  int cursor = 0;  // binary action factory: index of the offered candidate
  TraceLog trace;

  bool operator==(const SimState&) const = default;
};

}  // namespace jsl
