#include <algorithm>

#include "jobshoplab/errors.hpp"
#include "jobshoplab/plugins.hpp"
#include "jobshoplab/sim.hpp"

namespace jsl {

std::string_view to_string(MachineMode m) {
  switch (m) {
    case MachineMode::idle: return "idle";
    case MachineMode::setup: return "setup";
    case MachineMode::working: return "working";
    case MachineMode::outage: return "outage";
  }
  return "?";
}

std::string_view to_string(TransportMode m) {
  switch (m) {
    case TransportMode::idle: return "idle";
    case TransportMode::to_pickup: return "to_pickup";
    case TransportMode::loading: return "loading";
    case TransportMode::transit: return "transit";
    case TransportMode::unloading: return "unloading";
    case TransportMode::outage: return "outage";
  }
  return "?";
}

SimContext::SimContext(Instance inst, SimOptions options, std::shared_ptr<const PluginChain> plugins)
    : inst_(std::make_shared<const Instance>(std::move(inst))), options_(options), plugins_(std::move(plugins)) {
  const Instance& in = *inst_;
  transport_active_ = options_.transport && !in.transports.empty();
  if (options_.buffer_limits)
    for (const auto& m : in.machines)
      if (m.pre_buffer_capacity || m.post_buffer_capacity) bounded_ = true;

  for (const auto& j : in.jobs) {
    auto t = type_index(j.job_type);
    if (!t) {
      type_names_.push_back(j.job_type);
      t = static_cast<int>(type_names_.size()) - 1;
    }
    job_types_.push_back(*t);
    std::vector<std::pair<int, Tick>> ops;
    for (const auto& op : j.ops) {
      auto m = machine_index(op.machine);
      if (!m) throw Error("unknown machine '" + op.machine + "' in job " + j.id);
      ops.emplace_back(*m, op.duration);
      max_op_ = std::max(max_op_, op.duration);
    }
    ops_.push_back(std::move(ops));
  }

  const int locs = machine_count() + 1;
  travel_.assign(static_cast<std::size_t>(locs * locs), 0);
  auto loc_name = [&](int i) { return i == 0 ? std::string(kSource) : in.machines[i - 1].id; };
  for (int a = 0; a < locs; ++a)
    for (int b = 0; b < locs; ++b) {
      const Tick d = in.travel.lookup(loc_name(a), loc_name(b)).value_or(0);
      travel_[static_cast<std::size_t>(a * locs + b)] = d;
      max_travel_ = std::max(max_travel_, d);
    }

  const int types = type_count();
  setup_table_.assign(in.machines.size(), std::vector<Tick>(static_cast<std::size_t>((types + 1) * types), 0));
  Tick max_setup = 0;
  for (const auto& r : in.setups) {
    auto m = machine_index(r.machine);
    auto to = type_index(r.to_type);
    if (!m || !to) continue;
    int from = -1;
    if (r.from_type != kNeutral) {
      auto f = type_index(r.from_type);
      if (!f) continue;
      from = *f;
    }
    setup_table_[*m][static_cast<std::size_t>((from + 1) * types + *to)] = r.duration;
    max_setup = std::max(max_setup, r.duration);
  }

  Tick load = 0;
  for (const auto& t : in.transports) load = std::max(load, t.load_time + t.unload_time);
  const auto ops = static_cast<Tick>(in.total_operations());
  horizon_ = in.total_processing_time();
  if (plugins_ && plugins_->find("setup_times")) horizon_ += ops * max_setup;
  if (transport_active_) horizon_ += ops * (2 * max_travel_ + load);
  horizon_ = std::max<Tick>(horizon_, 1);
}

std::optional<int> SimContext::type_index(std::string_view name) const {
  for (std::size_t i = 0; i < type_names_.size(); ++i)
    if (type_names_[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

std::optional<int> SimContext::machine_index(std::string_view id) const {
  for (std::size_t i = 0; i < inst_->machines.size(); ++i)
    if (inst_->machines[i].id == id) return static_cast<int>(i);
  return std::nullopt;
}

std::optional<int> SimContext::transport_index(std::string_view id) const {
  for (std::size_t i = 0; i < inst_->transports.size(); ++i)
    if (inst_->transports[i].id == id) return static_cast<int>(i);
  return std::nullopt;
}

std::optional<int> SimContext::job_index(std::string_view id) const {
  for (std::size_t i = 0; i < inst_->jobs.size(); ++i)
    if (inst_->jobs[i].id == id) return static_cast<int>(i);
  return std::nullopt;
}

Tick SimContext::travel(ResourceRef from, ResourceRef to) const {
  const int locs = machine_count() + 1;
  return travel_[static_cast<std::size_t>(location_index(from) * locs + location_index(to))];
}

Tick SimContext::setup_rule(int machine, int from_type, int to_type) const {
  const int types = type_count();
  return setup_table_[machine][static_cast<std::size_t>((from_type + 1) * types + to_type)];
}

Tick SimContext::remaining_work(int job, int from_op) const {
  Tick sum = 0;
  for (int k = from_op; k < op_count(job); ++k) sum += op_duration(job, k);
  return sum;
}

std::string SimContext::resource_name(ResourceRef r) const {
  switch (r.kind) {
    case ResourceKind::none: return "";
    case ResourceKind::machine: return inst_->machines[r.index].id;
    case ResourceKind::transport: return inst_->transports[r.index].id;
    case ResourceKind::source: return std::string(kSource);
    case ResourceKind::sink: return std::string(kSink);
    case ResourceKind::buffer:
      if (r.index == kSourceBuffer) return std::string(kSource);
      if (r.index == kSinkBuffer) return std::string(kSink);
      return inst_->machines[buffer_machine(r.index)].id + (is_pre_buffer(r.index) ? ".pre" : ".post");
  }
  return "";
}

std::string SimContext::job_name(int job) const { return job < 0 ? std::string() : inst_->jobs[job].id; }

std::optional<ResourceRef> SimContext::resource_from_name(std::string_view name) const {
  if (name == kSource) return ResourceRef::source();
  if (name == kSink) return ResourceRef::sink();
  if (auto m = machine_index(name)) return ResourceRef::machine(*m);
  if (auto t = transport_index(name)) return ResourceRef::transport(*t);
  const auto dot = name.rfind('.');
  if (dot != std::string_view::npos) {
    auto m = machine_index(name.substr(0, dot));
    const auto suffix = name.substr(dot + 1);
    if (m && suffix == "pre") return ResourceRef::buffer(pre_buffer(*m));
    if (m && suffix == "post") return ResourceRef::buffer(post_buffer(*m));
  }
  return std::nullopt;
}

Candidate machine_assign(int machine, int job) {
  Event e;
  e.kind = EventKind::MachineAssign;
  e.origin = Origin::agent;
  e.unit = ResourceRef::machine(machine);
  e.job = job;
  return {e};
}

Candidate transport_assign(int transport, int job) {
  Event e;
  e.kind = EventKind::TransportAssign;
  e.origin = Origin::agent;
  e.unit = ResourceRef::transport(transport);
  e.job = job;
  return {e};
}

}  // namespace jsl
