#pragma once

#include <string>
#include <vector>

#include "jobshoplab/bench.hpp"

#ifndef JSL_DATA_DIR
#define JSL_DATA_DIR "data"
#endif

namespace jsl::testing {

inline std::string data_path(const std::string& rel) { return std::string(JSL_DATA_DIR) + "/" + rel; }

inline Instance d2() { return load_instance_file(data_path("instances/d2.dsl")); }
inline Instance d2_logistics() { return load_instance_file(data_path("instances/d2_logistics.dsl")); }
inline Instance orlib(const std::string& name) { return load_instance_file(data_path("orlib/" + name + ".txt")); }

inline EnvConfig multidiscrete(std::string extra = "") {
  return parse_config_dsl("action multidiscrete\n" + extra);
}

/// Full travel matrix over SOURCE and all machines: 1 + (a + b) % 3 ticks.
inline void add_travel(Instance& inst) {
  std::vector<std::string> locs{"SOURCE"};
  for (const auto& m : inst.machines) locs.push_back(m.id);
  for (std::size_t a = 0; a < locs.size(); ++a)
    for (std::size_t b = 0; b < locs.size(); ++b)
      if (a != b) inst.travel.entries.push_back({locs[a], locs[b], static_cast<Tick>(1 + (a + b) % 3)});
}

inline const std::vector<std::string>& extension_sets() {
  static const std::vector<std::string> sets{"none", "transport", "buffers", "setup", "breakdown", "stochastic", "all"};
  return sets;
}

/// Adds one extension (or all of them) to a classical instance.
inline Instance extend(Instance inst, const std::string& ext) {
  const bool all = ext == "all";
  if (ext == "transport" || all) {
    inst.transports.push_back({"t0", 1, 1, 1});
    inst.transports.push_back({"t1", 2, 0, 1});
    add_travel(inst);
  }
  if (ext == "buffers" || all)
    for (auto& m : inst.machines) {
      m.pre_buffer_capacity = 1;
      m.post_buffer_capacity = 1;
      m.buffer_order = BufferOrder::fifo;
    }
  if (ext == "setup" || all)
    for (const auto& m : inst.machines)
      for (const auto& a : inst.jobs)
        for (const auto& b : inst.jobs)
          if (a.id != b.id) inst.setups.push_back({m.id, a.job_type, b.job_type, 2});
  if (ext == "breakdown" || all)
    for (const auto& m : inst.machines) inst.outage_specs.push_back({m.id, 15, 3});
  if (ext == "stochastic" || all)
    inst.stochastic_specs.push_back({StochasticScope::processing, Distribution::uniform(0.8, 1.2), std::nullopt});
  inst.classification = classify(inst);
  return inst;
}

inline std::vector<TraceRecord> records(const SimState& s) { return s.trace.to_vector(); }

}  // namespace jsl::testing
