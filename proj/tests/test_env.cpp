#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "support.hpp"

#include <random>

using namespace jsl;
using namespace jsl::testing;

namespace {

const Instance& one_op() {
  static const Instance inst = parse_instance_dsl("machine m1\njob J1\n  op m1 5\n");
  return inst;
}

void check_observation(const Observation& o) {
  for (double x : o) {
    CHECK(std::isfinite(x));
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
}

/// Uniformly random multidiscrete action; mostly valid picks with some noise.
MultiDiscreteAction random_action(const Environment& env, const SimState& s, std::mt19937_64& rng) {
  MultiDiscreteAction a{std::vector<int>(static_cast<std::size_t>(env.multidiscrete_slots()), 0)};
  const auto cands = enabled_actions(env.context(), s);
  if (!cands.empty() && rng() % 5 != 0) {
    const auto& c = cands[rng() % cands.size()];
    const int slot = c.kind() == EventKind::MachineAssign ? c.unit().index : env.context().machine_count() + c.unit().index;
    a.choices[static_cast<std::size_t>(slot)] = c.job() + 1;
  } else if (!a.choices.empty() && rng() % 2 == 0) {
    a.choices[rng() % a.choices.size()] = static_cast<int>(rng() % static_cast<std::uint64_t>(env.context().job_count() + 1));
  }
  return a;
}

}  // namespace

TEST_CASE("reset gives the first decision point deterministically") {
  const Environment env(d2(), parse_config_dsl("observation simple\naction binary\nreward makespan terminal\n"));
  const auto [s, obs] = env.reset(4);
  CHECK(s.now == 0);
  CHECK(obs.size() == 7);
  CHECK(obs[0] == 0.0);
  CHECK(obs[1] == 0.0);
  CHECK(obs[4] == 1.0);
  check_observation(obs);
  const auto again = env.reset(4);
  CHECK(again.first == s);
  CHECK(again.second == obs);
}

TEST_CASE("config language") {
  const EnvConfig cfg = parse_config_dsl("observation simple\naction binary\nreward makespan terminal\n");
  CHECK(cfg.plugins.empty());
  CHECK(cfg.action == ActionMode::binary);
  CHECK(cfg.reward.mode == RewardMode::terminal);
  CHECK(parse_config_dsl(to_config_dsl(cfg)) == cfg);

  const EnvConfig full = parse_config_dsl(
      "# comment\naction multidiscrete\nreward weighted makespan=1 total_energy=0.5\n"
      "plugin consumption idle=1 working=3\nplugin stochastic dist=uniform lo=0.9 hi=1.1\nseed 12\n");
  CHECK(full.seed == 12);
  CHECK(full.plugins.size() == 2);
  CHECK(full.reward.weights.at("total_energy") == 0.5);
  CHECK(parse_config_dsl(to_config_dsl(full)) == full);

  try {
    parse_config_dsl("action warp9\n");
    FAIL("expected an unknown-factory error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("warp9") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_dsl("plugin consumption\nplugin consumption idle=2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_dsl("observation graph\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_dsl("reward weighted makespan=0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_dsl("reward weighted speed=1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_dsl("plugin teleport\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_dsl("seed twelve\n"), ConfigError);
}

TEST_CASE("one-operation episode under both action factories") {
  for (const char* action : {"action binary", "action multidiscrete"}) {
    const Environment env(one_op(), parse_config_dsl(std::string(action) + "\nreward makespan terminal\n"));
    auto [s, obs] = env.reset();
    const Action a = env.config().action == ActionMode::binary ? Action{BinaryAction{true}} : Action{MultiDiscreteAction{{1}}};
    const auto r = env.step(s, a);
    CHECK(r.done);
    CHECK(makespan(r.state) == 5);
    CHECK(r.reward == -1.0);
    CHECK(r.observation[1] == 1.0);
    REQUIRE(r.info.objectives.has_value());
    CHECK(r.info.objectives->makespan == 5);
    CHECK_THROWS_AS(env.step(r.state, a), Error);
  }
}

TEST_CASE("binary commit and defer rotation") {
  const Environment env(d2(), parse_config_dsl("action binary\n"));
  auto [s, obs] = env.reset();
  const auto cands = enabled_actions(env.context(), s);
  REQUIRE(cands.size() >= 2);

  const auto first = env.decode_binary(s, BinaryAction{true});
  REQUIRE(first.size() == 1);
  CHECK(first[0].kind == EventKind::MachineAssign);
  CHECK(first[0].unit.index == env.context().machine_index("m1"));
  CHECK(first[0].job == 0);
  CHECK(env.decode_binary(s, BinaryAction{false}).empty());

  // Each defer offers the next candidate; a full rotation moves time forward.
  SimState cur = s;
  for (std::size_t k = 0; k + 1 < cands.size(); ++k) {
    const auto r = env.step(cur, BinaryAction{false});
    CHECK_FALSE(r.info.time_advanced);
    CHECK(r.state.now == s.now);
    CHECK(offered_candidate(env.context(), r.state) == cands[k + 1]);
    cur = r.state;
  }
  const auto r = env.step(cur, BinaryAction{false});
  CHECK(r.info.time_advanced);
  CHECK(r.info.applied.empty());
  CHECK(r.state.now > s.now);

  // An always-defer agent never stalls the clock.
  SimState lazy = env.reset().first;
  for (int round = 0; round < 20; ++round) {
    const Tick before = lazy.now;
    const auto n = enabled_actions(env.context(), lazy).size();
    for (std::size_t k = 0; k < std::max<std::size_t>(n, 1); ++k) lazy = env.step(lazy, BinaryAction{false}).state;
    CHECK(lazy.now > before);
  }
}

TEST_CASE("binary commit with a single candidate takes it") {
  const Environment env(one_op(), parse_config_dsl("action binary\n"));
  const auto [s, obs] = env.reset();
  const auto cands = enabled_actions(env.context(), s);
  REQUIRE(cands.size() == 1);
  const auto ev = env.decode_binary(s, BinaryAction{true});
  REQUIRE(ev.size() == 1);
  CHECK(ev[0] == cands[0].event);
}

TEST_CASE("multidiscrete decoding and invalid actions") {
  const Environment env(d2(), multidiscrete());
  const auto [s, obs] = env.reset();
  REQUIRE(env.multidiscrete_slots() == 2);
  CHECK(env.action_space() == std::vector<int>{3, 3});

  StepInfo info;
  const auto ok = env.decode_multidiscrete(s, MultiDiscreteAction{{1, 0}}, &info);
  REQUIRE(ok.size() == 1);
  CHECK(ok[0].kind == EventKind::MachineAssign);
  CHECK(ok[0].unit.index == 0);
  CHECK(ok[0].job == 0);
  CHECK_FALSE(info.invalid_action);

  // J2 waits for m2, not m1.
  StepInfo bad;
  CHECK(env.decode_multidiscrete(s, MultiDiscreteAction{{2, 0}}, &bad).empty());
  CHECK(bad.invalid_action);

  const auto rejected = env.step(s, MultiDiscreteAction{{2, 0}});
  CHECK(rejected.info.invalid_action);
  CHECK(rejected.state == s);
  CHECK(rejected.reward == 0.0);

  for (const auto& wrong : {MultiDiscreteAction{{3, 0}}, MultiDiscreteAction{{-1, 0}}, MultiDiscreteAction{{1}}}) {
    const auto r = env.step(s, wrong);
    CHECK(r.info.invalid_action);
    CHECK(r.state == s);
  }
  CHECK(env.step(s, BinaryAction{true}).info.invalid_action);

  // m1 is busy after J1 starts; naming it again is rejected.
  const auto busy = env.step(s, MultiDiscreteAction{{1, 0}}).state;
  if (!is_terminal(busy)) {
    const auto again = env.step(busy, MultiDiscreteAction{{2, 0}});
    if (busy.machines[0].mode != MachineMode::idle) {
      CHECK(again.info.invalid_action);
      CHECK(again.state == busy);
    }
  }

  const auto idle = env.step(s, MultiDiscreteAction{{0, 0}});
  CHECK(idle.info.time_advanced);
  CHECK(idle.info.applied.empty());
}

TEST_CASE("rewards") {
  const Environment dense(d2(), multidiscrete("reward makespan dense\n"));
  const Environment terminal(d2(), multidiscrete("reward makespan terminal\n"));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto d = run_episode(dense, *make_policy("random", seed), seed);
    const auto t = run_episode(terminal, *make_policy("random", seed), seed);
    const double h = static_cast<double>(dense.context().horizon_bound());
    CHECK(d.total_reward == doctest::Approx(-static_cast<double>(d.objectives.makespan) / h));
    CHECK(t.total_reward == doctest::Approx(-static_cast<double>(t.objectives.makespan) / h));
  }

  // Zero-tick steps earn nothing in dense mode; the exact fraction telescopes.
  const Environment env(extend(make_random_classical(3, 3, 77), "transport"), multidiscrete("reward makespan dense\n"));
  auto [s, obs] = env.reset(1);
  const auto policy = make_policy("mwkr");
  std::int64_t num = 0;
  while (!is_terminal(s)) {
    MultiDiscreteAction a{std::vector<int>(static_cast<std::size_t>(env.multidiscrete_slots()), 0)};
    if (auto c = policy->choose(env.context(), s, enabled_actions(env.context(), s))) {
      const int slot = c->kind() == EventKind::MachineAssign ? c->unit().index : env.context().machine_count() + c->unit().index;
      a.choices[static_cast<std::size_t>(slot)] = c->job() + 1;
    }
    const auto r = env.step(s, a);
    CHECK(r.info.reward_den == env.context().horizon_bound());
    if (r.state.now == s.now) CHECK(r.reward == 0.0);
    num += r.info.reward_num;
    s = r.state;
  }
  CHECK(num == -makespan(s));
}

TEST_CASE("weighted rewards scalarize the objective vector") {
  const Instance inst = parse_instance_dsl("machine m1\njob J1 due 3 weight 2\n  op m1 5\n");
  const Environment env(inst, multidiscrete("reward weighted total_weighted_tardiness=1\n"));
  const auto [s, obs] = env.reset();
  const auto r = env.step(s, MultiDiscreteAction{{1}});
  REQUIRE(r.done);
  CHECK(r.info.objectives->total_weighted_tardiness == 4.0);
  CHECK(r.reward < 0.0);
}

TEST_CASE("objective vector definitions") {
  auto solo = [](const std::string& job_line) {
    const Environment env(parse_instance_dsl("machine m1\n" + job_line + "\n  op m1 5\n"), multidiscrete());
    const auto [s, obs] = env.reset();
    const auto r = env.step(s, MultiDiscreteAction{{1}});
    REQUIRE(r.done);
    return compute_objectives(env.context(), r.state);
  };
  const auto none = solo("job J1");
  CHECK(none.total_weighted_tardiness == 0.0);
  CHECK(none.weighted_tardy_count == 0.0);
  CHECK(none.total_weighted_completion == 5.0);

  const auto early = solo("job J1 due 7 weight 1");
  CHECK(early.max_lateness == -2);
  CHECK(early.total_weighted_tardiness == 0.0);

  const auto late = solo("job J1 due 3 weight 2");
  CHECK(late.total_weighted_tardiness == 4.0);
  CHECK(late.weighted_tardy_count == 2.0);
  CHECK(late.get("weighted_tardy_count") == 2.0);
  CHECK(objective_names().size() == 7);

  const Environment env(d2(), multidiscrete());
  CHECK_THROWS_AS(compute_objectives(env.context(), env.reset().first), Error);
}

TEST_CASE("observations stay in the unit cube and episodes are reproducible") {
  for (const auto& ext : extension_sets()) {
    for (int k = 0; k < 4; ++k) {
      const Instance inst = extend(make_random_classical(3 + k % 2, 3, 500 + k), ext);
      const Environment env(inst, multidiscrete("reward makespan dense\n"));
      auto play = [&](std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::vector<std::tuple<Observation, double, bool>> out;
        auto [s, obs] = env.reset(seed);
        check_observation(obs);
        int guard = 0;
        while (!is_terminal(s) && guard++ < 5000) {
          const auto r = env.step(s, random_action(env, s, rng));
          if (r.info.invalid_action) CHECK(r.state == s);
          check_observation(r.observation);
          if (r.done) {
            REQUIRE(r.info.objectives.has_value());
            CHECK(r.info.objectives->makespan == makespan(r.state));
            CHECK(r.observation[1] == 1.0);
          }
          out.emplace_back(r.observation, r.reward, r.done);
          s = r.state;
        }
        CHECK(is_terminal(s));
        return out;
      };
      CAPTURE(ext);
      CHECK(play(k) == play(k));
    }
  }
}

TEST_CASE("unknown plug-in parameters name the config line") {
  try {
    Environment env(d2(), parse_config_dsl("action binary\nplugin consumption warp=1\n"));
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("warp") != std::string::npos);
  }
}
