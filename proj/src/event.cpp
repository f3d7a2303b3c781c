#include "jobshoplab/event.hpp"

#include <array>

namespace jsl {

namespace {

constexpr std::array<std::string_view, 13> kKindNames = {
    "TransportAssign", "TransportArrivePickup", "TransportLoaded", "TransportDelivered", "MachineAssign",
    "SetupFinished",   "MachineStarted",        "MachineCompleted", "BufferPut",         "BufferGet",
    "BreakdownStart",  "RepairComplete",        "JobFinished",
};

}  // namespace

std::string_view to_string(EventKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<EventKind> event_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<EventKind>(i);
  return std::nullopt;
}

std::string_view to_string(Origin origin) { return origin == Origin::agent ? "agent" : "auto"; }

double priority(EventKind kind) {
  switch (kind) {
    case EventKind::BreakdownStart: return 100;
    case EventKind::RepairComplete: return 90;
    case EventKind::TransportDelivered: return 80;
    case EventKind::MachineCompleted: return 70;
    case EventKind::TransportArrivePickup:
    case EventKind::TransportAssign:
    case EventKind::TransportLoaded: return 60;
    case EventKind::SetupFinished: return 55;
    case EventKind::MachineStarted:
    case EventKind::MachineAssign: return 50;
    case EventKind::BufferPut:
    case EventKind::BufferGet: return 40;
    case EventKind::JobFinished: return 10;
  }
  return 0;
}

void TraceLog::push_back(const TraceRecord& r) {
  tail_.push_back(r);
  if (tail_.size() == kChunk) {
    chunks_.push_back(std::make_shared<const std::vector<TraceRecord>>(std::move(tail_)));
    tail_.clear();
    tail_.reserve(kChunk);
  }
}

const TraceRecord& TraceLog::operator[](std::size_t i) const {
  const std::size_t c = i / kChunk;
  if (c < chunks_.size()) return (*chunks_[c])[i % kChunk];
  return tail_[i - chunks_.size() * kChunk];
}

std::vector<TraceRecord> TraceLog::to_vector() const {
  std::vector<TraceRecord> out;
  out.reserve(size());
  for (const auto& c : chunks_) out.insert(out.end(), c->begin(), c->end());
  out.insert(out.end(), tail_.begin(), tail_.end());
  return out;
}

bool TraceLog::operator==(const TraceLog& other) const {
  if (chunks_.size() != other.chunks_.size() || tail_ != other.tail_) return false;
  for (std::size_t i = 0; i < chunks_.size(); ++i)
    if (chunks_[i] != other.chunks_[i] && *chunks_[i] != *other.chunks_[i]) return false;
  return true;
}

}  // namespace jsl
