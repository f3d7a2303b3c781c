#include "jobshoplab/instance.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

namespace jsl {

std::optional<Tick> TravelTimeMatrix::lookup(std::string_view from, std::string_view to) const {
  for (const auto& e : entries)
    if (e.from == from && e.to == to) return e.duration;
  if (from == to) return Tick{0};
  return std::nullopt;
}

bool Distribution::is_degenerate() const noexcept {
  switch (kind) {
    case Kind::deterministic: return true;
    case Kind::uniform: return a == 1.0 && b == 1.0;
    case Kind::gamma: return false;
  }
  return false;
}

std::string ThreeFieldTag::to_string() const {
  std::string mid;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (i) mid += ", ";
    mid += beta[i];
  }
  if (mid.empty()) return alpha + " || " + gamma;
  return alpha + " | " + mid + " | " + gamma;
}

bool ThreeFieldTag::has(std::string_view extension) const {
  for (const auto& b : beta)
    if (b == extension) return true;
  return false;
}

std::size_t Instance::total_operations() const noexcept {
  std::size_t n = 0;
  for (const auto& j : jobs) n += j.ops.size();
  return n;
}

Tick Instance::total_processing_time() const noexcept {
  Tick sum = 0;
  for (const auto& j : jobs)
    for (const auto& op : j.ops) sum += op.duration;
  return sum;
}

const MachineSpec* Instance::find_machine(std::string_view id) const {
  for (const auto& m : machines)
    if (m.id == id) return &m;
  return nullptr;
}

const TransportSpec* Instance::find_transport(std::string_view id) const {
  for (const auto& t : transports)
    if (t.id == id) return &t;
  return nullptr;
}

const JobSpec* Instance::find_job(std::string_view id) const {
  for (const auto& j : jobs)
    if (j.id == id) return &j;
  return nullptr;
}

std::vector<std::string> transport_locations(const Instance& inst) {
  std::vector<std::string> out{std::string(kSource)};
  for (const auto& m : inst.machines) out.push_back(m.id);
  return out;
}

namespace {

bool is_location(const Instance& inst, std::string_view id) {
  return id == kSource || id == kSink || inst.find_machine(id) != nullptr;
}

template <class Range, class Key>
void check_unique(const Range& items, Key key, const char* what, std::vector<std::string>& out) {
  std::map<std::string, int> seen;
  for (const auto& item : items)
    if (++seen[key(item)] == 2) out.push_back(std::string("duplicate ") + what + " id '" + key(item) + "'");
}

}  // namespace

std::vector<std::string> validate_instance(const Instance& inst) {
  std::vector<std::string> v;

  check_unique(inst.jobs, [](const JobSpec& j) { return j.id; }, "job", v);
  check_unique(inst.machines, [](const MachineSpec& m) { return m.id; }, "machine", v);
  check_unique(inst.transports, [](const TransportSpec& t) { return t.id; }, "transport", v);
  for (const auto& t : inst.transports)
    if (inst.find_machine(t.id)) v.push_back("transport id '" + t.id + "' collides with a machine id");
  for (const auto& m : inst.machines)
    if (m.id == kSource || m.id == kSink) v.push_back("machine id '" + m.id + "' is reserved");

  for (const auto& j : inst.jobs) {
    if (j.id.empty()) v.push_back("job with empty id");
    if (j.ops.empty()) v.push_back("job '" + j.id + "' has no operations");
    if (!(j.weight >= 0.0) || !std::isfinite(j.weight))
      v.push_back("job '" + j.id + "' weight must be finite and >= 0");
    if (j.due && *j.due < 0) v.push_back("job '" + j.id + "' due date must be >= 0");
    for (std::size_t k = 0; k < j.ops.size(); ++k) {
      const auto& op = j.ops[k];
      if (!inst.find_machine(op.machine))
        v.push_back("job '" + j.id + "' op " + std::to_string(k) + " references unknown machine '" + op.machine + "'");
      if (op.duration <= 0)
        v.push_back("job '" + j.id + "' op " + std::to_string(k) + " needs p_{i,j} > 0, got " +
                    std::to_string(op.duration));
    }
  }

  for (const auto& m : inst.machines) {
    if (m.pre_buffer_capacity && *m.pre_buffer_capacity < 1)
      v.push_back("machine '" + m.id + "' pre-buffer capacity must be >= 1");
    if (m.post_buffer_capacity && *m.post_buffer_capacity < 1)
      v.push_back("machine '" + m.id + "' post-buffer capacity must be >= 1");
  }

  for (const auto& t : inst.transports) {
    if (t.capacity < 1) v.push_back("transport '" + t.id + "' capacity must be >= 1");
    if (t.load_time < 0) v.push_back("transport '" + t.id + "' load time must be >= 0");
    if (t.unload_time < 0) v.push_back("transport '" + t.id + "' unload time must be >= 0");
  }

  for (const auto& e : inst.travel.entries) {
    if (!is_location(inst, e.from)) v.push_back("travel references unknown location '" + e.from + "'");
    if (!is_location(inst, e.to)) v.push_back("travel references unknown location '" + e.to + "'");
    if (e.duration < 0) v.push_back("travel " + e.from + "->" + e.to + " must be >= 0");
    if (e.from == e.to && e.duration != 0) v.push_back("travel diagonal " + e.from + "->" + e.to + " must be 0");
  }
  {
    std::map<std::pair<std::string, std::string>, int> seen;
    for (const auto& e : inst.travel.entries)
      if (++seen[{e.from, e.to}] == 2) v.push_back("duplicate travel entry " + e.from + "->" + e.to);
  }
  if (!inst.transports.empty()) {
    const auto locs = transport_locations(inst);
    for (const auto& a : locs)
      for (const auto& b : locs)
        if (a != b && !inst.travel.lookup(a, b)) v.push_back("travel matrix missing pair (" + a + ", " + b + ")");
  }

  {
    std::map<std::tuple<std::string, std::string, std::string>, int> seen;
    for (const auto& s : inst.setups) {
      if (!inst.find_machine(s.machine)) v.push_back("setup references unknown machine '" + s.machine + "'");
      if (s.duration < 0) v.push_back("setup duration on '" + s.machine + "' must be >= 0");
      if (s.to_type == kNeutral) v.push_back("setup to-type cannot be NEUTRAL");
      if (++seen[{s.machine, s.from_type, s.to_type}] == 2)
        v.push_back("duplicate setup rule (" + s.machine + ", " + s.from_type + ", " + s.to_type + ")");
    }
  }

  {
    std::map<std::string, int> seen;
    for (const auto& o : inst.outage_specs) {
      if (!inst.find_machine(o.resource) && !inst.find_transport(o.resource))
        v.push_back("outage references unknown resource '" + o.resource + "'");
      if (o.mean_time_between_failures <= 0) v.push_back("outage mtbf for '" + o.resource + "' must be > 0");
      if (o.mean_time_to_repair <= 0) v.push_back("outage mttr for '" + o.resource + "' must be > 0");
      if (++seen[o.resource] == 2) v.push_back("duplicate outage spec for '" + o.resource + "'");
    }
  }

  for (const auto& s : inst.stochastic_specs) {
    const auto& d = s.distribution;
    if (d.kind == Distribution::Kind::uniform && !(d.a > 0.0 && d.a <= d.b && std::isfinite(d.b)))
      v.push_back("uniform factors must satisfy 0 < lo <= hi");
    if (d.kind == Distribution::Kind::gamma && !(d.a > 0.0 && d.b > 0.0 && std::isfinite(d.a) && std::isfinite(d.b)))
      v.push_back("gamma shape and scale must be > 0");
    if (s.applies_to) {
      const bool ok = s.scope == StochasticScope::processing ? inst.find_machine(*s.applies_to) != nullptr
                                                             : inst.find_transport(*s.applies_to) != nullptr;
      if (!ok) v.push_back("stochastic spec references unknown resource '" + *s.applies_to + "'");
    }
  }
  return v;
}

ThreeFieldTag classify(const Instance& inst) {
  ThreeFieldTag tag;
  if (!inst.transports.empty()) tag.beta.emplace_back("transport");
  for (const auto& m : inst.machines) {
    if (m.pre_buffer_capacity || m.post_buffer_capacity || m.buffer_order == BufferOrder::fifo) {
      tag.beta.emplace_back("buffer");
      break;
    }
  }
  if (!inst.setups.empty()) tag.beta.emplace_back("setup");
  if (!inst.outage_specs.empty()) tag.beta.emplace_back("breakdown");
  for (const auto& s : inst.stochastic_specs) {
    if (s.distribution.kind != Distribution::Kind::deterministic) {
      tag.beta.emplace_back("stochastic");
      break;
    }
  }
  return tag;
}

Instance classical_reduction(const Instance& inst) {
  Instance out = inst;
  out.transports.clear();
  out.travel.entries.clear();
  for (auto& m : out.machines) {
    m.pre_buffer_capacity.reset();
    m.post_buffer_capacity.reset();
    m.buffer_order = BufferOrder::any;
  }
  out.setups.clear();
  out.outage_specs.clear();
  out.stochastic_specs.clear();
  out.classification = classify(out);
  return out;
}

}  // namespace jsl
