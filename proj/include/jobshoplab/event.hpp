#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "jobshoplab/instance.hpp"

namespace jsl {

enum class EventKind : std::uint8_t {
  TransportAssign,
  TransportArrivePickup,
  TransportLoaded,
  TransportDelivered,
  MachineAssign,
  SetupFinished,
  MachineStarted,
  MachineCompleted,
  BufferPut,
  BufferGet,
  BreakdownStart,
  RepairComplete,
  JobFinished,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view name);

/// Members of the breakdown class B.
constexpr bool is_breakdown(EventKind k) {
  return k == EventKind::BreakdownStart || k == EventKind::RepairComplete;
}

/// rho: larger values are applied first among events sharing a tick.
double priority(EventKind kind);

enum class Origin : std::uint8_t { agent, automatic };

std::string_view to_string(Origin origin);

enum class ResourceKind : std::uint8_t { none, machine, transport, buffer, source, sink };

/// Typed index into the instance's machines / transports or the state's buffers.
/// SOURCE and SINK double as locations.
struct ResourceRef {
  ResourceKind kind = ResourceKind::none;
  int index = -1;

  static constexpr ResourceRef none() { return {}; }
  static constexpr ResourceRef machine(int i) { return {ResourceKind::machine, i}; }
  static constexpr ResourceRef transport(int i) { return {ResourceKind::transport, i}; }
  static constexpr ResourceRef buffer(int i) { return {ResourceKind::buffer, i}; }
  static constexpr ResourceRef source() { return {ResourceKind::source, 0}; }
  static constexpr ResourceRef sink() { return {ResourceKind::sink, 0}; }

  explicit operator bool() const { return kind != ResourceKind::none; }
  auto operator<=>(const ResourceRef&) const = default;
};

/// Buffer layout: SOURCE, SINK, then (pre, post) per machine.
inline constexpr int kSourceBuffer = 0;
inline constexpr int kSinkBuffer = 1;
constexpr int pre_buffer(int machine) { return 2 + 2 * machine; }
constexpr int post_buffer(int machine) { return 3 + 2 * machine; }
constexpr int buffer_machine(int buffer) { return buffer >= 2 ? (buffer - 2) / 2 : -1; }
constexpr bool is_pre_buffer(int buffer) { return buffer >= 2 && buffer % 2 == 0; }

struct Event {
  Tick time = 0;
  EventKind kind = EventKind::JobFinished;
  Origin origin = Origin::automatic;
  ResourceRef unit;  // machine, transport or buffer the event acts on
  int job = -1;
  ResourceRef via;     // secondary party: taker/giver of a buffer move, or a location
  ResourceRef owner;   // timeline the event belongs to (suspended by outages)
  std::uint64_t seq = 0;  // 0 for agent events; queue insertion order otherwise

  bool operator==(const Event&) const = default;
};

struct TraceRecord {
  Tick time = 0;
  EventKind kind = EventKind::JobFinished;
  ResourceRef unit;
  int job = -1;
  ResourceRef via;
  double priority = 0.0;
  Origin origin = Origin::automatic;
  std::uint64_t batch = 0;  // records applied from one sorted event set share a batch
  bool derived = false;     // consequence recorded by the transition of the preceding primary record

  bool operator==(const TraceRecord&) const = default;
};

/// Append-only record log with O(1)-ish copies: full chunks are shared.
class TraceLog {
 public:
  void push_back(const TraceRecord& r);
  std::size_t size() const noexcept { return chunks_.size() * kChunk + tail_.size(); }
  bool empty() const noexcept { return size() == 0; }
  const TraceRecord& operator[](std::size_t i) const;
  const TraceRecord& back() const { return (*this)[size() - 1]; }
  std::vector<TraceRecord> to_vector() const;

  bool operator==(const TraceLog& other) const;

 private:
  static constexpr std::size_t kChunk = 128;
  std::vector<std::shared_ptr<const std::vector<TraceRecord>>> chunks_;
  std::vector<TraceRecord> tail_;
};

}  // namespace jsl
