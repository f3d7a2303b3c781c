#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "support.hpp"

#include <algorithm>

using namespace jsl;
using namespace jsl::testing;

namespace {

struct Start {
  SimContext ctx;
  SimState s;
  std::vector<Candidate> cands;
  explicit Start(Instance inst) : ctx(std::move(inst)), s(advance_to_decision(ctx, initial_state(ctx, 0))), cands(enabled_actions(ctx, s)) {}
};

/// Never picks anything, so time only creeps forward.
class IdlePolicy final : public Policy {
 public:
  std::string name() const override { return "idle"; }
  std::optional<Candidate> choose(const SimContext&, const SimState&, const std::vector<Candidate>&) const override {
    return std::nullopt;
  }
};

}  // namespace

TEST_CASE("SPT picks the shortest candidate operation") {
  Start d(d2());
  REQUIRE(d.cands.size() == 2);
  const auto c = SptPolicy{}.choose(d.ctx, d.s, d.cands);
  REQUIRE(c.has_value());
  CHECK(c->unit().index == d.ctx.machine_index("m2"));
  CHECK(c->job() == 1);
  const auto best = std::min_element(d.cands.begin(), d.cands.end(), [&](const Candidate& a, const Candidate& b) {
    return d.ctx.op_duration(a.job(), d.s.jobs[a.job()].next_op) < d.ctx.op_duration(b.job(), d.s.jobs[b.job()].next_op);
  });
  CHECK(*c == *best);

  Start tie(parse_instance_dsl("machine m1\njob A\n  op m1 3\njob B\n  op m1 3\n"));
  CHECK(SptPolicy{}.choose(tie.ctx, tie.s, tie.cands)->job() == 0);
  CHECK(MwkrPolicy{}.choose(tie.ctx, tie.s, tie.cands)->job() == 0);

  const std::vector<Candidate> single{d.cands.back()};
  CHECK(SptPolicy{}.choose(d.ctx, d.s, single) == single.front());
}

TEST_CASE("MWKR picks the job with most remaining work") {
  Start d(d2());
  const auto c = MwkrPolicy{}.choose(d.ctx, d.s, d.cands);
  REQUIRE(c.has_value());
  CHECK(c->job() == 1);
  // Remaining work recomputed from the instance.
  const Instance& inst = d.ctx.instance();
  auto remaining = [&](int j) {
    Tick w = 0;
    for (const auto& op : inst.jobs[static_cast<std::size_t>(j)].ops) w += op.duration;
    return w;
  };
  CHECK(remaining(0) == 5);
  CHECK(remaining(1) == 6);

  Start last(parse_instance_dsl("machine m1\njob J1\n  op m1 4\n"));
  CHECK(MwkrPolicy{}.choose(last.ctx, last.s, last.cands) == last.cands.front());
}

TEST_CASE("random policy is reproducible per seed") {
  Start d(d2());
  const std::vector<Candidate> single{d.cands.front()};
  CHECK(RandomPolicy(3).choose(d.ctx, d.s, single) == single.front());
  const Instance inst = make_random_classical(5, 4, 11);
  const auto a = run_episode(inst, multidiscrete(), RandomPolicy(8), 8);
  const auto b = run_episode(inst, multidiscrete(), RandomPolicy(8), 8);
  CHECK(records(a.state) == records(b.state));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = run_episode(inst, multidiscrete(), RandomPolicy(seed), seed);
    for (const auto& c : r.state.trace.to_vector()) CHECK(c.time >= 0);
  }
  CHECK_THROWS_AS(make_policy("lpt"), ConfigError);
}

TEST_CASE("D2 episodes reach the optimum") {
  const Tick optimum = brute_force_optimal(d2()).makespan;
  CHECK(optimum == 7);
  for (const char* name : {"spt", "mwkr"}) {
    const auto r = run_episode(d2(), multidiscrete(), *make_policy(name), 0);
    CHECK(is_terminal(r.state));
    CHECK(r.objectives.makespan == 7);
  }
  const Instance one = parse_instance_dsl("machine m1\nmachine m2\njob J1\n  op m1 3\n  op m2 4\n  op m1 2\n");
  for (const char* name : {"spt", "mwkr", "random"}) CHECK(run_episode(one, multidiscrete(), *make_policy(name, 1), 1).objectives.makespan == 9);
}

TEST_CASE("policy traces are feasible and never beat the optimum") {
  for (int k = 0; k < 20; ++k) {
    const Instance inst = make_random_classical(3, 3, 1000 + k);
    const Tick optimum = brute_force_optimal(inst).makespan;
    for (const char* name : {"spt", "mwkr", "random"}) {
      const auto r = run_episode(inst, multidiscrete(), *make_policy(name, k), k);
      CAPTURE(name);
      CHECK(validate_trace(inst, records(r.state), {}).empty());
      CHECK(r.objectives.makespan >= optimum);
    }
  }
  for (const auto& ext : extension_sets())
    for (const char* name : {"spt", "mwkr", "random"}) {
      const Instance inst = extend(make_random_classical(4, 3, 44), ext);
      const auto r = run_episode(inst, multidiscrete(), *make_policy(name, 2), 2);
      CAPTURE(ext);
      CAPTURE(name);
      CHECK(validate_trace(inst, records(r.state), {}).empty());
    }
}

TEST_CASE("deterministic rules repeat exactly") {
  for (const auto& inst : {orlib("ft06"), extend(make_random_classical(4, 4, 5), "transport")})
    for (const char* name : {"spt", "mwkr"}) {
      const auto a = run_episode(inst, multidiscrete(), *make_policy(name), 0);
      const auto b = run_episode(inst, multidiscrete(), *make_policy(name), 0);
      CHECK(records(a.state) == records(b.state));
    }
}

TEST_CASE("transport dispatch serves the earliest waiter with the nearest unit") {
  Instance inst = parse_instance_dsl(R"(machine m1
machine m2
transport t1 capacity 1
transport t2 capacity 1
travel SOURCE m1 1
travel SOURCE m2 1
travel m1 m2 1
travel m2 m1 1
travel m1 SOURCE 1
travel m2 SOURCE 1
job J1
  op m1 2
job J2
  op m2 2
)");
  Start st(inst);
  const auto t = fifo_transport_choice(st.ctx, st.s, st.cands);
  REQUIRE(t.has_value());
  CHECK(t->kind() == EventKind::TransportAssign);
  // Both units idle at SOURCE and both jobs waiting since 0: lowest ids win.
  CHECK(t->unit().index == 0);
  CHECK(t->job() == 0);
}

TEST_CASE("step budget aborts a stalled episode") {
  CHECK_THROWS_AS(run_episode(d2(), multidiscrete(), IdlePolicy{}, 0), Error);
}
