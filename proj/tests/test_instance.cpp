#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

using namespace jsl;
using namespace jsl::testing;

namespace {

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("minimal document parses to a classical instance") {
  const Instance inst = parse_instance_dsl("machine m1\njob J1\n  op m1 5\n");
  REQUIRE(inst.jobs.size() == 1);
  REQUIRE(inst.jobs[0].ops.size() == 1);
  CHECK(inst.jobs[0].ops[0].machine == "m1");
  CHECK(inst.jobs[0].ops[0].duration == 5);
  CHECK(inst.jobs[0].job_type == "J1");
  CHECK(inst.classification.to_string() == "J || Cmax");
  CHECK_FALSE(inst.machines[0].pre_buffer_capacity.has_value());
}

TEST_CASE("unknown machine reference names the id") {
  try {
    parse_instance_dsl("machine m1\njob J1\n  op m9 5\n");
    FAIL("expected a reference error");
  } catch (const ReferenceError& e) {
    CHECK(e.id() == "m9");
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("m9") != std::string::npos);
  }
}

TEST_CASE("duplicate ids and syntax errors carry positions") {
  CHECK_THROWS_AS(parse_instance_dsl("machine m1\nmachine m1\n"), DuplicateIdError);
  try {
    parse_instance_dsl("machine m1\njob J1\n  op m1 five\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() > 0);
  }
  CHECK_THROWS_AS(parse_instance_dsl("machine m1\nfrobnicate x\n"), ParseError);
}

TEST_CASE("D2 parses and round-trips through serialization") {
  const Instance inst = d2();
  CHECK(inst.jobs.size() == 2);
  CHECK(inst.total_operations() == 4);
  CHECK(inst.total_processing_time() == 11);
  CHECK(parse_instance_dsl(to_dsl(inst)) == inst);
  const Instance logi = d2_logistics();
  CHECK(parse_instance_dsl(to_dsl(logi)) == logi);
}

TEST_CASE("every extension survives a serialization round trip") {
  const std::string doc = R"(instance full
machine m1 pre 2 post inf order fifo
machine m2
transport t1 capacity 2 load 1 unload 2
travel SOURCE m1 1
travel SOURCE m2 2
travel m1 m2 3
travel m2 m1 3
travel m1 SOURCE 1
travel m2 SOURCE 2
job J1 type A due 10 weight 2.5
  op m1 3
  op m2 1
job J2 due 4
  op m2 2
setup m1 NEUTRAL A 2
outage m1 mtbf 20 mttr 4
outage t1 mtbf 30 mttr 2
stochastic processing uniform 0.9 1.1 on m1
stochastic transport gamma 2 0.5
)";
  const Instance inst = parse_instance_dsl(doc);
  CHECK(validate_instance(inst).empty());
  CHECK(parse_instance_dsl(to_dsl(inst)) == inst);
  CHECK(inst.jobs[0].weight == doctest::Approx(2.5));
  CHECK(inst.machines[0].pre_buffer_capacity == 2);
  CHECK_FALSE(inst.machines[0].post_buffer_capacity.has_value());
  CHECK(inst.classification.beta ==
        std::vector<std::string>{"transport", "buffer", "setup", "breakdown", "stochastic"});
}

TEST_CASE("OR-Library parsing") {
  const Instance one = parse_orlib("1 1\n0 5\n");
  REQUIRE(one.jobs.size() == 1);
  CHECK(one.jobs[0].ops[0].machine == one.machines[0].id);
  CHECK(one.jobs[0].ops[0].duration == 5);
  CHECK(one.classification.beta.empty());

  try {
    parse_orlib("2 2\n0 1 1 1 0 1\n0 1 1 1\n");
    FAIL("expected a pair-count error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("expected 2 pairs") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_orlib("1 1\n0 -5\n"), ParseError);
  CHECK_THROWS_AS(parse_orlib("1\n0 5\n"), ParseError);
}

TEST_CASE("FT06 has 36 operations and the file's duration sum") {
  const Instance ft = orlib("ft06");
  CHECK(ft.jobs.size() == 6);
  for (const auto& j : ft.jobs) CHECK(j.ops.size() == 6);
  // Independent sum over the raw file: every second number after the header.
  std::ifstream in(data_path("orlib/ft06.txt"));
  std::string line;
  Tick sum = 0;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream ls(line);
    Tick m = 0, p = 0;
    while (ls >> m >> p) sum += p;
  }
  CHECK(ft.total_processing_time() == sum);
  CHECK(sum == 197);
}

TEST_CASE("validation reports each broken invariant") {
  CHECK(validate_instance(d2()).empty());

  Instance zero = d2();
  zero.jobs[0].ops[0].duration = 0;
  const auto v = validate_instance(zero);
  CHECK(v.size() == 1);
  CHECK(mentions(v, "p_{i,j} > 0"));

  Instance missing = d2();
  missing.transports.push_back({"t1", 1, 0, 0});
  add_travel(missing);
  auto& e = missing.travel.entries;
  e.erase(std::remove_if(e.begin(), e.end(), [](const TravelEntry& t) { return t.from == "m1" && t.to == "m2"; }), e.end());
  const auto mv = validate_instance(missing);
  CHECK(mv.size() == 1);
  CHECK(mentions(mv, "(m1, m2)"));
}

TEST_CASE("single-field corruptions are all detected") {
  const Instance base = parse_instance_dsl(R"(machine m1 pre 1 post 1
machine m2
transport t1 capacity 1
travel SOURCE m1 1
travel SOURCE m2 1
travel m1 m2 1
travel m2 m1 1
travel m1 SOURCE 1
travel m2 SOURCE 1
job J1 type A
  op m1 2
  op m2 3
setup m1 NEUTRAL A 1
outage m1 mtbf 10 mttr 2
stochastic processing uniform 0.5 1.5
)");
  REQUIRE(validate_instance(base).empty());
  std::vector<std::function<void(Instance&)>> corruptions{
      [](Instance& i) { i.jobs[0].ops[0].machine = "nope"; },
      [](Instance& i) { i.jobs[0].ops[1].duration = -1; },
      [](Instance& i) { i.jobs[0].ops.clear(); },
      [](Instance& i) { i.jobs[0].weight = -1; },
      [](Instance& i) { i.jobs.push_back(i.jobs[0]); },
      [](Instance& i) { i.machines.push_back(i.machines[1]); },
      [](Instance& i) { i.machines[0].pre_buffer_capacity = 0; },
      [](Instance& i) { i.machines[0].post_buffer_capacity = -3; },
      [](Instance& i) { i.transports[0].capacity = 0; },
      [](Instance& i) { i.transports[0].load_time = -1; },
      [](Instance& i) { i.travel.entries[0].duration = -2; },
      [](Instance& i) { i.travel.entries.push_back({"m1", "m1", 4}); },
      [](Instance& i) { i.travel.entries.pop_back(); },
      [](Instance& i) { i.setups.push_back(i.setups[0]); },
      [](Instance& i) { i.setups[0].machine = "zz"; },
      [](Instance& i) { i.outage_specs[0].mean_time_between_failures = 0; },
      [](Instance& i) { i.outage_specs[0].mean_time_to_repair = 0; },
      [](Instance& i) { i.outage_specs[0].resource = "ghost"; },
      [](Instance& i) { i.stochastic_specs[0].distribution = Distribution::uniform(1.5, 0.5); },
      [](Instance& i) { i.stochastic_specs[0].distribution = Distribution::gamma(0, 1); },
      [](Instance& i) { i.transports[0].id = "m1"; },
  };
  for (std::size_t k = 0; k < corruptions.size(); ++k) {
    Instance bad = base;
    corruptions[k](bad);
    CAPTURE(k);
    CHECK_FALSE(validate_instance(bad).empty());
  }
}

TEST_CASE("classical reduction strips extensions and is idempotent") {
  const Instance classical = d2();
  CHECK(classical_reduction(classical) == classical);

  const Instance logi = d2_logistics();
  const Instance red = classical_reduction(logi);
  CHECK(red.classification.to_string() == "J || Cmax");
  CHECK(red.transports.empty());
  CHECK(red.travel.empty());
  CHECK(red.setups.empty());
  CHECK(classical_reduction(red) == red);
  REQUIRE(red.jobs.size() == logi.jobs.size());
  for (std::size_t j = 0; j < red.jobs.size(); ++j) CHECK(red.jobs[j].ops == logi.jobs[j].ops);

  for (const auto& ext : extension_sets()) {
    const Instance x = extend(d2(), ext);
    CHECK(classical_reduction(classical_reduction(x)) == classical_reduction(x));
    CHECK(classical_reduction(x).total_processing_time() == 11);
  }
}

TEST_CASE("classification lists active extensions in canonical order") {
  CHECK(classify(d2()).to_string() == "J || Cmax");
  Instance ts = extend(d2(), "transport");
  ts.setups.push_back({"m1", "J1", "J2", 1});
  const auto tag = classify(ts);
  CHECK(tag.has("transport"));
  CHECK(tag.has("setup"));
  CHECK_FALSE(tag.has("breakdown"));
  CHECK(classify(extend(d2(), "all")).beta ==
        std::vector<std::string>{"transport", "buffer", "setup", "breakdown", "stochastic"});
  for (const char* name : {"ft06", "la01", "la05"}) CHECK(classify(orlib(name)).beta.empty());
}

TEST_CASE("format sniffing and bounds files") {
  CHECK(load_instance_text("2 1\n0 3\n0 4\n").jobs.size() == 2);
  CHECK(load_instance_text("# comment\nmachine m1\njob J\n op m1 1\n").machines.size() == 1);
  const auto bounds = parse_bounds("# lb\nft06 55\nla01 666  # known\n\n");
  CHECK(bounds.at("ft06") == 55);
  CHECK(bounds.at("la01") == 666);
  CHECK_THROWS_AS(parse_bounds("ft06 fifty\n"), Error);
  CHECK_THROWS_AS(parse_bounds("ft06\n"), Error);
}
