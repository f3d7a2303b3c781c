#include <algorithm>

#include "jobshoplab/env.hpp"
#include "jobshoplab/errors.hpp"

namespace jsl {

const std::vector<std::string>& objective_names() {
  static const std::vector<std::string> names = {
      "makespan",          "max_lateness", "total_weighted_completion",  "total_weighted_tardiness",
      "weighted_tardy_count", "total_energy", "total_buffer_occupancy_time",
  };
  return names;
}

double ObjectiveVector::get(std::string_view name) const {
  if (name == "makespan") return static_cast<double>(makespan);
  if (name == "max_lateness") return static_cast<double>(max_lateness);
  if (name == "total_weighted_completion") return total_weighted_completion;
  if (name == "total_weighted_tardiness") return total_weighted_tardiness;
  if (name == "weighted_tardy_count") return weighted_tardy_count;
  if (name == "total_energy") return total_energy;
  if (name == "total_buffer_occupancy_time") return total_buffer_occupancy_time;
  throw Error("unknown objective '" + std::string(name) + "'");
}

ObjectiveVector objectives_from_trace(const Instance& inst, const std::vector<TraceRecord>& trace, double energy) {
  const std::size_t n = inst.jobs.size();
  std::vector<std::optional<Tick>> completion(n);
  Tick occupied = 0;
  Tick last = 0;
  double occupancy = 0;
  auto shift = [&](Tick t, int delta) {
    occupancy += static_cast<double>(occupied) * static_cast<double>(t - last);
    last = t;
    occupied += delta;
  };
  auto machine_buffer = [](ResourceRef r) { return r.kind == ResourceKind::buffer && r.index >= 2; };
  for (const auto& r : trace) {
    if (r.kind == EventKind::JobFinished && r.job >= 0 && static_cast<std::size_t>(r.job) < n) completion[r.job] = r.time;
    if (r.kind == EventKind::BufferPut) {
      if (machine_buffer(r.unit)) shift(r.time, +1);
      if (machine_buffer(r.via)) shift(r.time, -1);
    } else if (r.kind == EventKind::BufferGet && machine_buffer(r.unit)) {
      shift(r.time, -1);
    }
  }

  ObjectiveVector o;
  bool any_due = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!completion[i]) throw Error("objectives need a terminal trace; job " + inst.jobs[i].id + " never finished");
    const Tick c = *completion[i];
    const JobSpec& job = inst.jobs[i];
    o.makespan = std::max(o.makespan, c);
    o.total_weighted_completion += job.weight * static_cast<double>(c);
    if (job.due) {
      const Tick lateness = c - *job.due;
      o.max_lateness = any_due ? std::max(o.max_lateness, lateness) : lateness;
      any_due = true;
      if (lateness > 0) {
        o.total_weighted_tardiness += job.weight * static_cast<double>(lateness);
        o.weighted_tardy_count += job.weight;
      }
    }
  }
  shift(std::max(o.makespan, last), 0);
  o.total_buffer_occupancy_time = occupancy;
  o.total_energy = energy;
  return o;
}

ObjectiveVector compute_objectives(const SimContext& ctx, const SimState& s) {
  if (!is_terminal(s)) throw Error("objectives need a terminal state");
  double e = 0;
  if (ctx.plugins()) {
    const auto m = ctx.plugins()->metrics(ctx, s);
    if (auto it = m.find("consumption.energy"); it != m.end()) e = it->second;
  }
  return objectives_from_trace(ctx.instance(), s.trace.to_vector(), e);
}

}  // namespace jsl
