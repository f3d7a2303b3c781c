// Acceptance checks: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "support.hpp"

#ifndef JSL_CLI_PATH
#define JSL_CLI_PATH "jobshoplab"
#endif

using namespace jsl;
using namespace jsl::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

class Check {
 public:
  void expect(bool cond, const std::string& what) {
    ++count_;
    if (!cond && failures_.size() < 5) failures_.push_back(what);
    if (!cond) ++failed_;
  }
  Outcome done(std::string summary) const {
    if (failed_ == 0) return {true, std::move(summary)};
    std::string d = std::to_string(failed_) + " of " + std::to_string(count_) + " checks failed";
    for (const auto& f : failures_) d += "; " + f;
    return {false, d};
  }

 private:
  std::size_t count_ = 0, failed_ = 0;
  std::vector<std::string> failures_;
};

std::vector<std::pair<std::string, Instance>> suite_instances() {
  std::vector<std::pair<std::string, Instance>> out;
  for (const char* name : {"ft06", "la01", "la02", "la03", "la04", "la05"}) out.emplace_back(name, orlib(name));
  out.emplace_back("d2", d2());
  for (int k = 0; k < 50; ++k) out.emplace_back("rand" + std::to_string(k), make_random_classical(3, 3, 9000 + k));
  return out;
}

const std::vector<std::pair<std::string, std::uint64_t>>& suite_policies() {
  static const std::vector<std::pair<std::string, std::uint64_t>> p{
      {"spt", 0}, {"mwkr", 0}, {"random", 0}, {"random", 1}, {"random", 2}};
  return p;
}

std::string label(const std::string& inst, const std::string& ext, const std::string& pol, std::uint64_t seed) {
  return inst + "/" + ext + "/" + pol + "/s" + std::to_string(seed);
}

Outcome feasibility() {
  Check c;
  std::size_t episodes = 0;
  for (const auto& [name, base] : suite_instances())
    for (const auto& ext : extension_sets()) {
      const Instance inst = extend(base, ext);
      const Environment env(inst, multidiscrete());
      for (const auto& [pol, seed] : suite_policies()) {
        const auto r = run_episode(env, *make_policy(pol, seed), seed);
        const auto v = validate_trace(inst, records(r.state), {});
        c.expect(v.empty(), label(name, ext, pol, seed) + (v.empty() ? "" : ": " + v.front().kind + " " + v.front().detail));
        ++episodes;
      }
    }
  return c.done(std::to_string(episodes) + " traces, 0 violations");
}

Outcome oracle() {
  Check c;
  int equal = 0;
  for (int k = 0; k < 50; ++k) {
    const Instance inst = make_random_classical(3, 3, 9000 + k);
    const Tick opt = brute_force_optimal(inst).makespan;
    bool hit = false;
    for (const auto& [pol, seed] : suite_policies()) {
      const Tick ms = run_episode(inst, multidiscrete(), *make_policy(pol, seed), seed).objectives.makespan;
      c.expect(opt <= ms, "rand" + std::to_string(k) + " " + pol + ": optimum " + std::to_string(opt) + " > " + std::to_string(ms));
      hit |= ms == opt;
    }
    equal += hit;
  }
  c.expect(equal > 0, "no policy reached the optimum on any instance");
  return c.done("50 instances, optimum matched on " + std::to_string(equal));
}

Outcome ft06() {
  Check c;
  const Instance inst = orlib("ft06");
  const auto t0 = std::chrono::steady_clock::now();
  const auto exact = brute_force_optimal(inst, true);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(exact.makespan == 55, "optimum " + std::to_string(exact.makespan) + ", expected 55");
  c.expect(schedule_violations(inst, exact.starts).empty(), "witness infeasible");
  std::ostringstream d;
  d << "optimum " << exact.makespan << " in " << exact.nodes << " nodes";
  for (const char* pol : {"spt", "mwkr"}) {
    const Tick ms = run_episode(inst, multidiscrete(), *make_policy(pol), 0).objectives.makespan;
    const double ratio = static_cast<double>(exact.makespan) / static_cast<double>(ms);
    c.expect(exact.makespan <= ms, std::string(pol) + " beats the optimum");
    c.expect(ratio > 0.0 && ratio <= 1.0, std::string(pol) + " ratio out of range");
    d << ", " << pol << " " << ms << " (ratio " << ratio << ")";
  }
  c.expect(secs < 600, "oracle too slow");
  return c.done(d.str());
}

Outcome reduction() {
  Check c;
  std::size_t compared = 0;
  const EnvConfig off = parse_config_dsl("action multidiscrete\nextensions off\n");
  for (const auto& [name, base] : suite_instances())
    for (const auto& ext : extension_sets()) {
      const Instance inst = extend(base, ext);
      const Environment full(inst, off);
      const Environment reduced(classical_reduction(inst), multidiscrete());
      for (const auto& [pol, seed] : suite_policies()) {
        const auto a = run_episode(full, *make_policy(pol, seed), seed);
        const auto b = run_episode(reduced, *make_policy(pol, seed), seed);
        c.expect(records(a.state) == records(b.state), label(name, ext, pol, seed));
        ++compared;
      }
    }
  return c.done(std::to_string(compared) + " trace pairs identical");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  Check c;
  const fs::path root = fs::temp_directory_path() / "jsl_acceptance_bench";
  fs::remove_all(root);
  fs::create_directories(root / "instances");
  fs::copy_file(data_path("instances/d2_logistics.dsl"), root / "instances/d2_logistics.dsl");
  fs::copy_file(data_path("orlib/la01.txt"), root / "instances/la01.txt");
  {
    std::ofstream rnd(root / "instances/rand.dsl");
    rnd << to_dsl(extend(make_random_classical(4, 3, 77), "all"));
  }
  auto run = [&](const std::string& tag) {
    const std::string cmd = std::string("\"") + JSL_CLI_PATH + "\" bench --instances \"" + (root / "instances").string() +
                            "\" --policies spt,mwkr,random --config \"" + data_path("configs/stochastic.cfg") +
                            "\" --seeds 0..2 --workers 2 --report \"" + (root / (tag + ".json")).string() +
                            "\" --trace-dir \"" + (root / tag).string() + "\" > /dev/null";
    return std::system(cmd.c_str());
  };
  c.expect(run("a") == 0, "first bench run failed");
  c.expect(run("b") == 0, "second bench run failed");
  const std::string report = slurp(root / "a.json");
  c.expect(!report.empty() && report == slurp(root / "b.json"), "reports differ");
  c.expect(report.find("breakdowns.count") != std::string::npos, "breakdown plug-in inactive");
  c.expect(report.find("stochastic.samples") != std::string::npos, "stochastic plug-in inactive");
  std::size_t files = 0;
  if (fs::exists(root / "a"))
    for (const auto& e : fs::directory_iterator(root / "a")) {
      ++files;
      c.expect(slurp(e.path()) == slurp(root / "b" / e.path().filename()), e.path().filename().string() + " differs");
    }
  c.expect(files == 27, std::to_string(files) + " trace files, expected 27");
  fs::remove_all(root);
  return c.done("report and " + std::to_string(files) + " traces byte-identical with breakdowns and stochastic durations");
}

Candidate pick(const SimContext& ctx, const SimState& s, EventKind kind, int unit, int job) {
  for (const auto& c : enabled_actions(ctx, s))
    if (c.kind() == kind && c.unit().index == unit && c.job() == job) return c;
  throw Error("scenario candidate not enabled at t=" + std::to_string(s.now));
}

SimState take(const SimContext& ctx, const SimState& s, const Candidate& c) {
  Event e = c.event;
  e.time = s.now;
  return advance_to_decision(ctx, apply_event(ctx, open_batch(s, s.now), e));
}

std::vector<std::string> kinds_at(const SimContext& ctx, const SimState& s, Tick t, const std::vector<EventKind>& of) {
  std::vector<std::string> out;
  for (const auto& r : name_records(ctx, records(s)))
    if (r.time == t && std::find_if(of.begin(), of.end(), [&](EventKind k) { return to_string(k) == r.kind; }) != of.end())
      out.push_back(r.kind + "@" + r.resource);
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
  return s;
}

/// Takes first candidates until the clock reaches `t`; events due at `t` are applied, agent choices there are not.
SimState drain(const SimContext& ctx, SimState s, Tick t) {
  while (!is_terminal(s) && s.now < t) {
    const auto cands = enabled_actions(ctx, s);
    if (!cands.empty()) s = take(ctx, s, cands.front());
    else s = advance_to_decision(ctx, advance(ctx, s, s.now + 1));
  }
  return s;
}

Outcome priorities() {
  Check c;
  const std::string layout = R"(machine m1
machine m2
transport t1 capacity 1 load 0 unload 0
transport t2 capacity 1 load 0 unload 0
travel SOURCE m1 1
travel SOURCE m2 3
travel m1 m2 1
travel m2 m1 1
travel m1 SOURCE 2
travel m2 SOURCE 2
)";
  std::vector<std::string> notes;

  {
    // Breakdown of m1 coincides with the delivery of J1 to m1 at t=1.
    const Instance inst = parse_instance_dsl(layout + "job J1\n  op m1 2\n");
    const SimContext ctx(inst, SimOptions{true, true});
    SimState s = advance_to_decision(ctx, initial_state(ctx, 0));
    Event down;
    down.time = 1;
    down.kind = EventKind::BreakdownStart;
    down.unit = ResourceRef::machine(0);
    Event up = down;
    up.time = 3;
    up.kind = EventKind::RepairComplete;
    s = enqueue(enqueue(s, down), up);
    s = take(ctx, s, pick(ctx, s, EventKind::TransportAssign, 0, 0));
    s = drain(ctx, s, 1);
    const auto got = kinds_at(ctx, s, 1, {EventKind::BreakdownStart, EventKind::TransportDelivered});
    c.expect(got == std::vector<std::string>{"BreakdownStart@m1", "TransportDelivered@t1"}, "breakdown/delivery: " + join(got));
    c.expect(validate_trace(inst, records(s), {}).empty(), "breakdown/delivery trace invalid");
    notes.push_back(join(got));
  }
  {
    // J2 reaches m2 at t=3 while J1's setup on m1 ends and processing starts.
    const Instance inst = parse_instance_dsl(layout + "job J1 type A\n  op m1 2\njob J2\n  op m2 1\nsetup m1 NEUTRAL A 2\n");
    const EnvConfig cfg = parse_config_dsl("");
    const SimContext ctx(inst, SimOptions{true, true}, build_plugins(inst, cfg));
    SimState s = advance_to_decision(ctx, initial_state(ctx, 0));
    s = take(ctx, s, pick(ctx, s, EventKind::TransportAssign, 0, 0));
    s = take(ctx, s, pick(ctx, s, EventKind::TransportAssign, 1, 1));
    if (s.now < 1) s = advance_to_decision(ctx, advance(ctx, s, 1));
    s = take(ctx, s, pick(ctx, s, EventKind::MachineAssign, 0, 0));
    s = drain(ctx, s, 3);
    const auto got = kinds_at(ctx, s, 3, {EventKind::TransportDelivered, EventKind::MachineStarted});
    c.expect(got == std::vector<std::string>{"TransportDelivered@t2", "MachineStarted@m1"}, "delivery/start: " + join(got));
    notes.push_back(join(got));
  }
  {
    // J1 completes on m1 at t=3 as t1 arrives at SOURCE to pick up J2.
    const Instance inst = parse_instance_dsl(layout + "job J1\n  op m1 2\njob J2\n  op m2 1\n");
    const SimContext ctx(inst, SimOptions{true, true});
    SimState s = advance_to_decision(ctx, initial_state(ctx, 0));
    s = take(ctx, s, pick(ctx, s, EventKind::TransportAssign, 0, 0));
    if (s.now < 1) s = advance_to_decision(ctx, advance(ctx, s, 1));
    s = take(ctx, s, pick(ctx, s, EventKind::MachineAssign, 0, 0));
    s = take(ctx, s, pick(ctx, s, EventKind::TransportAssign, 0, 1));
    s = drain(ctx, s, 3);
    const auto got = kinds_at(ctx, s, 3, {EventKind::MachineCompleted, EventKind::TransportArrivePickup});
    c.expect(got == std::vector<std::string>{"MachineCompleted@m1", "TransportArrivePickup@t1"}, "completion/pickup: " + join(got));
    notes.push_back(join(got));
  }
  return c.done(notes[0] + " | " + notes[1] + " | " + notes[2]);
}

Outcome capacity() {
  Check c;
  std::size_t states = 0;
  for (int ep = 0; ep < 1000; ++ep) {
    Instance inst = make_random_classical(2 + ep % 4, 2 + ep % 3, 20000 + static_cast<std::uint64_t>(ep));
    for (auto& m : inst.machines) {
      m.pre_buffer_capacity = 1;
      m.post_buffer_capacity = 1;
    }
    inst.transports.push_back({"t1", 1, ep % 2, 1});
    add_travel(inst);
    inst.classification = classify(inst);
    SimContext ctx(inst, SimOptions{true, true});
    ctx.set_observer([&](const SimState& s, const Event&) {
      ++states;
      for (const auto& b : s.buffers)
        if (b.capacity) c.expect(static_cast<int>(b.slots.size()) <= *b.capacity, "buffer over capacity");
      for (std::size_t t = 0; t < s.transports.size(); ++t)
        c.expect(static_cast<int>(s.transports[t].cargo.size()) <= inst.transports[t].capacity, "cargo over capacity");
      for (const auto& f : check_invariants(ctx, s)) c.expect(false, f);
    });
    SimState s = advance_to_decision(ctx, initial_state(ctx, static_cast<std::uint64_t>(ep)));
    std::uint64_t h = static_cast<std::uint64_t>(ep);
    while (!is_terminal(s)) {
      const auto cands = enabled_actions(ctx, s);
      h = splitmix64(h);
      s = take(ctx, s, cands[h % cands.size()]);
    }
    c.expect(validate_trace(inst, records(s), {}).empty(), "episode " + std::to_string(ep) + " trace invalid");
  }
  return c.done("1000 episodes, " + std::to_string(states) + " intermediate states within capacity");
}

Outcome telescoping() {
  Check c;
  std::size_t episodes = 0;
  for (const auto& ext : extension_sets())
    for (int k = 0; k < 10; ++k) {
      const Instance inst = extend(make_random_classical(3 + k % 3, 3, 3000 + k), ext);
      const Environment env(inst, multidiscrete("reward makespan dense\n"));
      const auto policy = make_policy(k % 2 ? "random" : "mwkr", k);
      auto [s, obs] = env.reset(k);
      std::int64_t num = 0;
      const std::int64_t den = env.context().horizon_bound();
      while (!is_terminal(s)) {
        MultiDiscreteAction a{std::vector<int>(static_cast<std::size_t>(env.multidiscrete_slots()), 0)};
        if (auto ch = policy->choose(env.context(), s, enabled_actions(env.context(), s))) {
          const int slot = ch->kind() == EventKind::MachineAssign ? ch->unit().index : env.context().machine_count() + ch->unit().index;
          a.choices[static_cast<std::size_t>(slot)] = ch->job() + 1;
        }
        const auto r = env.step(s, a);
        c.expect(r.info.reward_den == den, "denominator changed mid-episode");
        num += r.info.reward_num;
        s = r.state;
      }
      const Tick ms = makespan(s);
      c.expect(num == -ms, ext + ": reward numerator " + std::to_string(num) + " vs makespan " + std::to_string(ms));
      c.expect(static_cast<double>(num) / static_cast<double>(den) == -static_cast<double>(ms) / static_cast<double>(den),
               "rounded sum differs");
      ++episodes;
    }
  return c.done(std::to_string(episodes) + " dense episodes sum to exactly -makespan/horizon");
}

/// Per-machine mode ticks rebuilt from the trace alone.
double trace_energy(const Instance& inst, const std::vector<TraceRecord>& trace, Tick end, const double rate[4]) {
  const std::size_t n = inst.machines.size();
  std::vector<int> mode(n, 0), resume(n, 0);
  std::vector<Tick> since(n, 0);
  double energy = 0;
  auto enter = [&](std::size_t m, int next, Tick t) {
    energy += rate[mode[m]] * static_cast<double>(t - since[m]);
    mode[m] = next;
    since[m] = t;
  };
  for (const auto& r : trace) {
    if (r.unit.kind != ResourceKind::machine) continue;
    const auto m = static_cast<std::size_t>(r.unit.index);
    switch (r.kind) {
      case EventKind::MachineAssign: enter(m, 1, r.time); break;
      case EventKind::MachineStarted: enter(m, 2, r.time); break;
      case EventKind::MachineCompleted: enter(m, 0, r.time); break;
      case EventKind::BreakdownStart:
        resume[m] = mode[m];
        enter(m, 3, r.time);
        break;
      case EventKind::RepairComplete: enter(m, resume[m], r.time); break;
      default: break;
    }
  }
  for (std::size_t m = 0; m < n; ++m) enter(m, mode[m], end);
  return energy;
}

Outcome consumption() {
  Check c;
  const double rate[4] = {1, 3, 7, 2};
  const EnvConfig cfg = multidiscrete("plugin consumption idle=1 setup=3 working=7 outage=2\n");
  for (int ep = 0; ep < 100; ++ep) {
    const std::string& ext = extension_sets()[static_cast<std::size_t>(ep) % extension_sets().size()];
    const Instance inst = extend(make_random_classical(3 + ep % 3, 2 + ep % 3, 4000 + static_cast<std::uint64_t>(ep)), ext);
    const auto r = run_episode(inst, cfg, *make_policy("random", ep), static_cast<std::uint64_t>(ep));
    const double expected = trace_energy(inst, records(r.state), r.state.now, rate);
    c.expect(r.objectives.total_energy == expected, "episode " + std::to_string(ep) + " (" + ext + "): " +
                                                        std::to_string(r.objectives.total_energy) + " vs " + std::to_string(expected));
  }
  return c.done("100 episodes, reported energy equals the trace integral exactly");
}

Outcome degenerate() {
  Check c;
  std::size_t pairs = 0;
  const EnvConfig base = multidiscrete();
  const EnvConfig unit = multidiscrete("plugin stochastic dist=uniform lo=1.0 hi=1.0\n");
  auto strip = [](const std::string& doc) {
    auto j = nlohmann::json::parse(doc);
    j.erase("plugins");
    return j.dump(2);
  };
  for (const auto& [name, inst0] : suite_instances()) {
    if (name.rfind("rand", 0) == 0 && name != "rand0" && name != "rand1") continue;
    for (const char* ext : {"none", "transport", "buffers", "setup"}) {
      const Instance inst = extend(inst0, ext);
      const Environment a(inst, base), b(inst, unit);
      for (const auto& [pol, seed] : suite_policies()) {
        const auto ra = run_episode(a, *make_policy(pol, seed), seed);
        const auto rb = run_episode(b, *make_policy(pol, seed), seed);
        const TraceMeta meta{pol, seed};
        c.expect(strip(trace_json(a.context(), ra.state, meta)) == strip(trace_json(b.context(), rb.state, meta)),
                 label(name, ext, pol, seed));
        ++pairs;
      }
    }
  }
  return c.done(std::to_string(pairs) + " trace documents byte-identical outside the plug-in block");
}

Outcome observations() {
  Check c;
  std::size_t steps = 0;
  std::mt19937_64 rng(11);
  const Environment binary(d2(), parse_config_dsl("action binary\n"));
  c.expect(binary.action_space() == std::vector<int>{2}, "binary action space is not {2}");
  int round = 0;
  while (steps < 10000) {
    const std::string& ext = extension_sets()[static_cast<std::size_t>(round) % extension_sets().size()];
    const Instance inst = extend(make_random_classical(3 + round % 3, 3, 5000 + static_cast<std::uint64_t>(round)), ext);
    const bool use_binary = round % 2 == 0;
    const Environment env(inst, parse_config_dsl(use_binary ? "action binary\n" : "action multidiscrete\n"));
    auto [s, obs] = env.reset(static_cast<std::uint64_t>(round));
    auto check = [&](const Observation& o) {
      c.expect(o.size() == 7, "observation length");
      for (double x : o) c.expect(std::isfinite(x) && x >= 0.0 && x <= 1.0, "component out of [0,1]");
    };
    check(obs);
    int guard = 0;
    while (!is_terminal(s) && guard++ < 20000) {
      Action a;
      if (use_binary) {
        a = BinaryAction{rng() % 3 != 0};
      } else {
        MultiDiscreteAction m{std::vector<int>(static_cast<std::size_t>(env.multidiscrete_slots()), 0)};
        const auto cands = enabled_actions(env.context(), s);
        if (!cands.empty()) {
          const auto& ch = cands[rng() % cands.size()];
          const int slot = ch.kind() == EventKind::MachineAssign ? ch.unit().index : env.context().machine_count() + ch.unit().index;
          m.choices[static_cast<std::size_t>(slot)] = ch.job() + 1;
        }
        a = m;
      }
      const auto r = env.step(s, a);
      check(r.observation);
      s = r.state;
      ++steps;
    }
    c.expect(is_terminal(s), "episode did not finish");
    ++round;
  }
  return c.done(std::to_string(steps) + " steps over " + std::to_string(round) + " episodes; binary space has 2 actions");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"feasibility suite", feasibility},
      {"oracle optimality", oracle},
      {"FT06 exact bound", ft06},
      {"classical reduction equivalence", reduction},
      {"CLI bench determinism", cli_determinism},
      {"priority semantics", priorities},
      {"capacity properties", capacity},
      {"reward telescoping", telescoping},
      {"consumption identity", consumption},
      {"degenerate stochasticity", degenerate},
      {"observation contract", observations},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.ok;
    std::printf("%s %2zu %s: %s (%.2fs)\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
