#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "support.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

using namespace jsl;
using namespace jsl::testing;
using nlohmann::json;

namespace {

bool has_kind(const std::vector<Violation>& v, const std::string& kind) {
  for (const auto& x : v)
    if (x.kind == kind) return true;
  return false;
}

std::vector<NamedRecord> named_episode(const Instance& inst, const std::string& policy, std::uint64_t seed = 0) {
  const Environment env(inst, multidiscrete());
  const auto r = run_episode(env, *make_policy(policy, seed), seed);
  return name_records(env.context(), records(r.state));
}

/// Machine orders realized by a trace, by start time.
std::vector<std::vector<int>> machine_orders(const SimState& s, int machines) {
  std::vector<std::vector<int>> orders(static_cast<std::size_t>(machines));
  for (const auto& r : s.trace.to_vector())
    if (r.kind == EventKind::MachineStarted) orders[static_cast<std::size_t>(r.unit.index)].push_back(r.job);
  return orders;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("validator accepts simulator traces") {
  for (const auto& ext : extension_sets())
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const Instance inst = extend(make_random_classical(4, 3, 60 + seed), ext);
      const auto named = named_episode(inst, "random", seed);
      CAPTURE(ext);
      CHECK(validate_trace(inst, named, {}).empty());
    }
}

TEST_CASE("validator flags overlapping operations") {
  const Instance inst = parse_instance_dsl("machine m1\njob J1\n  op m1 3\njob J2\n  op m1 3\n");
  auto named = named_episode(inst, "spt");
  REQUIRE(validate_trace(inst, named, {}).empty());
  // J2 starts on m1 while J1 is still running there; times stay sorted.
  int moved = 0;
  for (auto& r : named)
    if (r.job == std::optional<std::string>("J2") && r.time == 3 &&
        (r.kind == "MachineAssign" || r.kind == "BufferGet" || r.kind == "MachineStarted")) {
      r.time = 1;
      ++moved;
    }
  REQUIRE(moved == 3);
  std::stable_sort(named.begin(), named.end(), [](const NamedRecord& a, const NamedRecord& b) { return a.time < b.time; });
  CHECK(has_kind(validate_trace(inst, named, {}), "overlap"));
}

TEST_CASE("validator flags broken precedence") {
  const Instance inst = parse_instance_dsl("machine m1\nmachine m2\njob J1\n  op m1 3\n  op m2 4\n");
  auto named = named_episode(inst, "spt");
  REQUIRE(validate_trace(inst, named, {}).empty());
  int moved = 0;
  for (auto& r : named)
    if (r.resource == "m2" && (r.kind == "MachineAssign" || r.kind == "MachineStarted")) {
      r.time = 1;
      ++moved;
    }
  REQUIRE(moved == 2);
  CHECK(has_kind(validate_trace(inst, named, {}), "precedence"));
}

TEST_CASE("exact solver") {
  CHECK(brute_force_optimal(parse_instance_dsl("machine m1\nmachine m2\njob J1\n  op m1 3\n  op m2 4\n")).makespan == 7);
  const auto d = brute_force_optimal(d2());
  CHECK(d.makespan == 7);
  CHECK(schedule_violations(d2(), d.starts).empty());
  CHECK_THROWS_AS(brute_force_optimal(orlib("ft06")), SizeGuardError);
}

TEST_CASE("oracle agreement on random 3x3 instances") {
  int equal = 0;
  for (int k = 0; k < 50; ++k) {
    const Instance inst = make_random_classical(3, 3, 7000 + k);
    for (const auto& j : inst.jobs)
      for (const auto& op : j.ops) CHECK((op.duration >= 1 && op.duration <= 9));
    const auto exact = brute_force_optimal(inst);
    CHECK(schedule_violations(inst, exact.starts).empty());
    const auto replay = run_episode(inst, multidiscrete(), SequencePolicy(exact.machine_orders), 0);
    CHECK(replay.objectives.makespan == exact.makespan);
    CHECK(validate_trace(inst, records(replay.state), {}).empty());
    bool hit = false;
    for (const char* name : {"spt", "mwkr", "random"}) {
      const Tick ms = run_episode(inst, multidiscrete(), *make_policy(name, k), k).objectives.makespan;
      CHECK(ms >= exact.makespan);
      hit |= ms == exact.makespan;
    }
    equal += hit;
  }
  CHECK(equal > 0);
}

TEST_CASE("benchmark summaries") {
  BenchSpec spec;
  spec.instances = {d2()};
  spec.policies = {"spt", "mwkr"};
  spec.config = multidiscrete();
  spec.seeds = {1, 2, 3};
  const auto report = run_benchmark(spec);
  REQUIRE(report.instances.size() == 1);
  CHECK(report.instances[0].lower_bound == 7);
  CHECK(report.instances[0].lb_source == "exact");
  CHECK(report.instances[0].lb_valid);
  CHECK(report.runs.size() == 6);
  for (const auto& p : report.summaries) {
    CHECK(p.ratio == 1.0);
    CHECK(p.std_makespan == 0.0);
    CHECK(p.runs == 3);
  }
  const auto& ri = report.relative_improvement.at("d2");
  CHECK(ri.at("spt").at("spt") == 0.0);
  CHECK(ri.at("mwkr").at("mwkr") == 0.0);

  spec.bounds = {{"d2", 6}};
  const auto filed = run_benchmark(spec);
  CHECK(filed.instances[0].lb_source == "file");
  CHECK(filed.summaries[0].ratio == doctest::Approx(6.0 / 7.0));

  spec.bounds.clear();
  spec.exact_bounds = false;
  const auto none = run_benchmark(spec);
  CHECK(none.instances[0].lb_source == "none");
  CHECK_FALSE(none.summaries[0].ratio.has_value());

  CHECK(sample_std({4, 4, 4}) == 0.0);
  CHECK(sample_std({1, 3}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("ratios stay in (0, 1] whenever the bound is valid") {
  BenchSpec spec;
  for (int k = 0; k < 5; ++k) spec.instances.push_back(extend(make_random_classical(3, 3, 90 + k), k % 2 ? "transport" : "setup"));
  spec.policies = {"spt", "mwkr", "random"};
  spec.config = multidiscrete();
  spec.seeds = {0, 1};
  const auto report = run_benchmark(spec);
  for (const auto& p : report.summaries)
    if (p.ratio) {
      CHECK(*p.ratio > 0.0);
      CHECK(*p.ratio <= 1.0);
    }
}

TEST_CASE("benchmark output is independent of worker count") {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "jsl_bench_test";
  fs::remove_all(root);
  BenchSpec spec;
  spec.instances = {d2(), extend(make_random_classical(3, 3, 5), "all")};
  spec.instances[1].name = "rand-all";
  spec.policies = {"spt", "random"};
  spec.config = multidiscrete("plugin consumption idle=1 working=2");
  spec.seeds = {0, 1, 2};
  spec.trace_dir = (root / "a").string();
  spec.workers = 1;
  const std::string a = report_json(run_benchmark(spec));
  spec.trace_dir = (root / "b").string();
  spec.workers = 3;
  const std::string b = report_json(run_benchmark(spec));
  CHECK(a == b);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(root / "a")) {
    ++files;
    CHECK(slurp(e.path()) == slurp(root / "b" / e.path().filename()));
  }
  CHECK(files == 12);
  CHECK(json::parse(a).contains("runs"));
  fs::remove_all(root);
}

TEST_CASE("gantt export") {
  const json empty = json::parse(export_gantt({}));
  CHECK(empty["resources"].empty());
  CHECK(empty.contains("makespan"));

  const json one = json::parse(export_gantt(named_episode(parse_instance_dsl("machine m1\njob J1\n  op m1 5\n"), "spt")));
  REQUIRE(one["resources"].size() == 1);
  const auto& lane = one["resources"][0];
  CHECK(lane["id"] == "m1");
  REQUIRE(lane["intervals"].size() == 1);
  CHECK(lane["intervals"][0]["start"] == 0);
  CHECK(lane["intervals"][0]["end"] == 5);
  CHECK(lane["intervals"][0]["kind"] == "working");
  CHECK(one["makespan"] == 5);

  for (const auto& ext : extension_sets()) {
    const json g = json::parse(export_gantt(named_episode(extend(make_random_classical(4, 3, 12), ext), "mwkr")));
    for (const auto& res : g["resources"]) {
      Tick prev_end = 0;
      for (const auto& iv : res["intervals"]) {
        CAPTURE(ext);
        CHECK(iv["start"].get<Tick>() < iv["end"].get<Tick>());
        CHECK(iv["start"].get<Tick>() >= prev_end);
        prev_end = iv["end"].get<Tick>();
      }
    }
  }
}

TEST_CASE("trace documents round-trip") {
  const Instance inst = extend(make_random_classical(3, 3, 31), "all");
  const Environment env(inst, multidiscrete());
  const auto r = run_episode(env, *make_policy("spt"), 4);
  const TraceDocument doc = parse_trace_json(trace_json(env.context(), r.state, {"spt", 4}));
  CHECK(doc.makespan == r.objectives.makespan);
  CHECK(resolve_records(env.context(), doc.records) == records(r.state));
  CHECK(validate_trace(inst, doc.records, {}).empty());
}

TEST_CASE("travel never shortens a replayed schedule") {
  for (int k = 0; k < 10; ++k) {
    const Instance base = make_random_classical(3, 3, 400 + k);
    const auto plain = run_episode(base, multidiscrete(), *make_policy("spt"), 0);
    const auto orders = machine_orders(plain.state, static_cast<int>(base.machines.size()));
    for (Tick delta : {1, 3}) {
      Instance moved = base;
      moved.transports.push_back({"t1", 1, 0, 0});
      std::vector<std::string> locs{"SOURCE"};
      for (const auto& m : base.machines) locs.push_back(m.id);
      for (const auto& a : locs)
        for (const auto& b : locs)
          if (a != b) moved.travel.entries.push_back({a, b, delta});
      moved.classification = classify(moved);
      const auto slow = run_episode(moved, multidiscrete(), SequencePolicy(orders), 0);
      CAPTURE(k);
      CHECK(slow.objectives.makespan >= plain.objectives.makespan);
      CHECK(machine_orders(slow.state, static_cast<int>(base.machines.size())) == orders);
    }
  }
}
