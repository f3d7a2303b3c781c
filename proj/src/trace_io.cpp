#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "jobshoplab/bench.hpp"
#include "jobshoplab/errors.hpp"

namespace jsl {

using nlohmann::json;

namespace {

bool buffer_event(EventKind k) {
  return k == EventKind::BufferPut || k == EventKind::BufferGet || k == EventKind::JobFinished;
}

ResourceRef resolve_name(const SimContext& ctx, const std::string& name, bool as_buffer, std::size_t index) {
  if (name.empty()) return ResourceRef::none();
  auto r = ctx.resource_from_name(name);
  if (!r) throw Error("record " + std::to_string(index) + ": unknown resource '" + name + "'");
  if (as_buffer && r->kind == ResourceKind::source) return ResourceRef::buffer(kSourceBuffer);
  if (as_buffer && r->kind == ResourceKind::sink) return ResourceRef::buffer(kSinkBuffer);
  return *r;
}

json record_to_json(const NamedRecord& r) {
  json j;
  j["t"] = r.time;
  j["kind"] = r.kind;
  j["resource"] = r.resource;
  j["job"] = r.job ? json(*r.job) : json(nullptr);
  j["via"] = r.via;
  j["priority"] = r.priority;
  j["origin"] = r.origin;
  j["batch"] = r.batch;
  j["derived"] = r.derived;
  return j;
}

NamedRecord record_from_json(const json& j, std::size_t index) {
  if (!j.is_object()) throw Error("record " + std::to_string(index) + " is not an object");
  NamedRecord r;
  try {
    r.time = (j.contains("t") ? j.at("t") : j.at("time")).get<Tick>();
    r.kind = j.at("kind").get<std::string>();
    r.resource = j.at("resource").get<std::string>();
    if (j.contains("job") && !j["job"].is_null()) r.job = j["job"].get<std::string>();
    r.via = j.value("via", std::string());
    r.priority = j.contains("priority") ? j["priority"].get<double>() : 0.0;
    r.origin = j.value("origin", std::string("auto"));
    r.batch = j.value("batch", std::uint64_t{0});
    r.derived = j.value("derived", false);
  } catch (const json::exception& e) {
    throw Error("record " + std::to_string(index) + ": " + e.what());
  }
  if (!event_kind_from_string(r.kind)) throw Error("record " + std::to_string(index) + ": unknown kind '" + r.kind + "'");
  if (r.origin != "agent" && r.origin != "auto")
    throw Error("record " + std::to_string(index) + ": unknown origin '" + r.origin + "'");
  if (!r.job && !is_breakdown(*event_kind_from_string(r.kind)))
    throw Error("record " + std::to_string(index) + ": missing job");
  return r;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<NamedRecord> name_records(const SimContext& ctx, const std::vector<TraceRecord>& records) {
  std::vector<NamedRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    NamedRecord n;
    n.time = r.time;
    n.kind = std::string(to_string(r.kind));
    n.resource = ctx.resource_name(r.unit);
    if (r.job >= 0) n.job = ctx.job_name(r.job);
    n.via = ctx.resource_name(r.via);
    n.priority = r.priority;
    n.origin = std::string(to_string(r.origin));
    n.batch = r.batch;
    n.derived = r.derived;
    out.push_back(std::move(n));
  }
  return out;
}

std::vector<TraceRecord> resolve_records(const SimContext& ctx, const std::vector<NamedRecord>& records) {
  std::vector<TraceRecord> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& n = records[i];
    TraceRecord r;
    r.time = n.time;
    const auto kind = event_kind_from_string(n.kind);
    if (!kind) throw Error("record " + std::to_string(i) + ": unknown kind '" + n.kind + "'");
    r.kind = *kind;
    const bool buf = buffer_event(r.kind);
    r.unit = resolve_name(ctx, n.resource, buf, i);
    // Buffer moves name their partner: a machine, a transport, or a source buffer.
    r.via = resolve_name(ctx, n.via, buf, i);
    if (n.job) {
      auto j = ctx.job_index(*n.job);
      if (!j) throw Error("record " + std::to_string(i) + ": unknown job '" + *n.job + "'");
      r.job = *j;
    }
    r.priority = n.priority;
    r.origin = n.origin == "agent" ? Origin::agent : Origin::automatic;
    r.batch = n.batch;
    r.derived = n.derived;
    out.push_back(r);
  }
  return out;
}

std::string trace_json(const SimContext& ctx, const SimState& s, const TraceMeta& meta) {
  json doc;
  json records = json::array();
  for (const auto& r : name_records(ctx, s.trace.to_vector())) records.push_back(record_to_json(r));
  doc["records"] = std::move(records);

  json summary;
  const bool done = is_terminal(s);
  summary["terminal"] = done;
  summary["end_time"] = s.now;
  summary["makespan"] = done ? json(makespan(s)) : json(nullptr);
  json machines = json::object();
  const auto ticks = machine_mode_ticks(s);
  for (int m = 0; m < ctx.machine_count(); ++m) {
    json t;
    t["busy"] = ticks[m][static_cast<int>(MachineMode::working)];
    t["idle"] = ticks[m][static_cast<int>(MachineMode::idle)];
    t["setup"] = ticks[m][static_cast<int>(MachineMode::setup)];
    t["outage"] = ticks[m][static_cast<int>(MachineMode::outage)];
    machines[ctx.resource_name(ResourceRef::machine(m))] = t;
  }
  summary["machines"] = std::move(machines);
  if (done) {
    const auto obj = compute_objectives(ctx, s);
    json o;
    for (const auto& name : objective_names()) o[name] = obj.get(name);
    summary["objectives"] = std::move(o);
  }
  doc["summary"] = std::move(summary);

  json plugins = json::object();
  if (ctx.plugins()) {
    for (const auto& [k, v] : ctx.plugins()->metrics(ctx, s)) plugins[k] = v;
    json samples = json::array();
    for (const auto& d : s.plugin_output.samples) {
      json x;
      x["kind"] = d.kind == DurationKind::processing ? "processing" : d.kind == DurationKind::setup ? "setup" : "travel";
      x["resource"] = ctx.resource_name(d.unit);
      x["job"] = ctx.job_name(d.job);
      x["nominal"] = d.nominal;
      x["realized"] = d.realized;
      samples.push_back(std::move(x));
    }
    if (!samples.empty()) plugins["samples"] = std::move(samples);
  }
  doc["plugins"] = std::move(plugins);

  json m;
  m["instance"] = ctx.instance().name;
  m["seed"] = meta.seed;
  m["policy"] = meta.policy;
  doc["meta"] = std::move(m);
  return doc.dump(2);
}

TraceDocument parse_trace_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("malformed trace JSON: ") + e.what());
  }
  TraceDocument out;
  const json* records = &doc;
  if (doc.is_object()) {
    if (!doc.contains("records")) throw Error("trace document has no 'records' array");
    records = &doc["records"];
    if (doc.contains("summary") && doc["summary"].contains("makespan") && !doc["summary"]["makespan"].is_null())
      out.makespan = doc["summary"]["makespan"].get<Tick>();
    if (doc.contains("meta") && doc["meta"].contains("instance")) out.instance = doc["meta"]["instance"].get<std::string>();
  }
  if (!records->is_array()) throw Error("trace 'records' is not an array");
  for (std::size_t i = 0; i < records->size(); ++i) out.records.push_back(record_from_json((*records)[i], i));
  return out;
}

std::map<std::string, Tick> parse_bounds(std::string_view text) {
  std::map<std::string, Tick> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string name, value, extra;
    if (!(ls >> name)) continue;
    if (!(ls >> value) || (ls >> extra)) throw Error("bounds line " + std::to_string(number) + ": expected '<name> <bound>'");
    std::size_t used = 0;
    Tick v = 0;
    try {
      v = std::stoll(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || v < 0) throw Error("bounds line " + std::to_string(number) + ": bad bound '" + value + "'");
    out[name] = v;
  }
  return out;
}

Instance load_instance_text(std::string_view text, std::string_view format, std::string name) {
  std::string fmt(format);
  if (fmt == "auto") {
    // OR-Library files open with "<jobs> <machines>"; the DSL opens with a keyword.
    fmt = "dsl";
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      if (std::isdigit(static_cast<unsigned char>(line[first]))) fmt = "orlib";
      break;
    }
  }
  if (fmt == "orlib") return parse_orlib(text, name.empty() ? "orlib" : name);
  if (fmt != "dsl") throw ConfigError("unknown instance format '" + fmt + "'");
  Instance inst = parse_instance_dsl(text);
  if (inst.name.empty() && !name.empty()) inst.name = std::move(name);
  return inst;
}

Instance load_instance_file(const std::string& path, std::string_view format) {
  return load_instance_text(read_file(path), format, std::filesystem::path(path).stem().string());
}

// ---- Gantt ------------------------------------------------------------------

namespace {

struct Interval {
  std::optional<std::string> job;
  std::optional<int> op;
  Tick start = 0;
  Tick end = 0;
  std::string kind;
};

struct Lane {
  std::vector<Interval> done;
  std::optional<Interval> open;
  std::optional<Interval> interrupted;  // resumes after repair

  void close(Tick t) {
    if (!open) return;
    open->end = t;
    if (open->end > open->start) done.push_back(*open);
    open.reset();
  }
  void start(Tick t, std::string kind, std::optional<std::string> job, std::optional<int> op) {
    close(t);
    open = Interval{std::move(job), op, t, t, std::move(kind)};
  }
};

}  // namespace

std::string export_gantt(const std::vector<NamedRecord>& records) {
  std::map<std::string, Lane> lanes;
  std::map<std::string, int> started;    // per job: operations started
  std::map<std::string, int> completed;  // per job: operations completed
  std::map<std::string, int> cargo;      // per transport
  std::set<std::string> transports;
  Tick end = 0;
  std::optional<Tick> finish;

  for (const auto& r : records) {
    const auto kind = event_kind_from_string(r.kind);
    if (!kind) throw Error("unknown record kind '" + r.kind + "'");
    end = std::max(end, r.time);
    const std::string job = r.job.value_or("");
    Lane& lane = lanes[r.resource];
    switch (*kind) {
      case EventKind::MachineAssign:
        lane.start(r.time, "setup", r.job, started[job]);
        break;
      case EventKind::MachineStarted:
        lane.start(r.time, "working", r.job, started[job]);
        ++started[job];
        break;
      case EventKind::MachineCompleted:
        lane.close(r.time);
        ++completed[job];
        break;
      case EventKind::TransportAssign:
        transports.insert(r.resource);
        if (!lane.open) lane.start(r.time, "travel", r.job, completed[job]);
        break;
      case EventKind::TransportArrivePickup:
        lane.start(r.time, "load", r.job, completed[job]);
        break;
      case EventKind::TransportLoaded:
        lane.start(r.time, "travel", r.job, completed[job]);
        break;
      case EventKind::TransportDelivered:
        lane.start(r.time, "unload", r.job, completed[job]);
        break;
      case EventKind::BufferGet:
        if (transports.count(r.via)) ++cargo[r.via];
        break;
      case EventKind::BufferPut: {
        if (!transports.count(r.via)) break;
        Lane& t = lanes[r.via];
        // Unloading at the current location skips the Delivered record.
        if (t.open && t.open->kind == "travel") t.open->kind = "unload";
        t.close(r.time);
        if (--cargo[r.via] > 0) t.start(r.time, "travel", std::nullopt, std::nullopt);
        break;
      }
      case EventKind::BreakdownStart:
        if (lane.open) {
          lane.interrupted = *lane.open;
          lane.close(r.time);
        }
        lane.start(r.time, "outage", std::nullopt, std::nullopt);
        break;
      case EventKind::RepairComplete:
        lane.close(r.time);
        if (lane.interrupted) {
          lane.interrupted->start = r.time;
          lane.open = lane.interrupted;
          lane.interrupted.reset();
        }
        break;
      case EventKind::JobFinished:
        finish = std::max(finish.value_or(0), r.time);
        break;
      case EventKind::SetupFinished:
        break;
    }
  }

  json resources = json::array();
  for (auto& [id, lane] : lanes) {
    lane.close(end);
    if (lane.done.empty()) continue;
    json intervals = json::array();
    for (const auto& iv : lane.done) {
      json x;
      x["job"] = iv.job ? json(*iv.job) : json(nullptr);
      x["op"] = iv.op ? json(*iv.op) : json(nullptr);
      x["start"] = iv.start;
      x["end"] = iv.end;
      x["kind"] = iv.kind;
      intervals.push_back(std::move(x));
    }
    resources.push_back({{"id", id}, {"intervals", std::move(intervals)}});
  }
  json doc;
  doc["resources"] = std::move(resources);
  doc["makespan"] = finish.value_or(end);
  return doc.dump(2);
}

}  // namespace jsl
