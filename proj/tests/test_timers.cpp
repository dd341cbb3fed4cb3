#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <numeric>

#include "support/generators.hpp"
#include "tasklaw/timers.hpp"

using namespace tasklaw;

namespace {

// Steps until the first starting state enters `one`, by plain stepping.
StepCount brute_duration(const TimerSpec& t) {
  StateId s = t.zero().members().front();
  StepCount k = 0;
  while (!t.one().contains(s)) {
    s = t.substrate().step(s);
    ++k;
  }
  return k;
}

std::vector<TimerSpec> four_timers() {
  return {make_counter_timer(4, 5, "C5a"), make_counter_timer(6, 5, "C5b"),
          make_particle_timer(64, 1, 5, "P5"), make_counter_timer(4, 7, "C7")};
}

std::vector<std::vector<std::string>> names(const std::vector<TimerClass>& cs) {
  std::vector<std::vector<std::string>> out;
  for (const auto& c : cs) {
    out.emplace_back();
    for (const auto& m : c.members) out.back().push_back(m.name());
  }
  return out;
}

}  // namespace

TEST_CASE("counter timer") {
  const auto c = make_counter_timer(4, 5);
  CHECK(c.name() == "counter(4,5)");
  CHECK(c.substrate().size() == 16);
  CHECK(c.zero().members() == std::vector<StateId>{0});
  CHECK(c.running().members() == std::vector<StateId>{1, 2, 3, 4});
  CHECK(c.one().size() == 11);
  CHECK(c.duration() == 5);
  CHECK(c.horizon() == 10);
  CHECK(c.uniform_duration());
  CHECK(validate_null_constructor(c).ok());
  CHECK_THROWS_AS(make_counter_timer(0, 1), PreconditionError);
  CHECK_THROWS_AS(make_counter_timer(21, 5), PreconditionError);
  CHECK_THROWS_AS(make_counter_timer(4, 0), PreconditionError);
  CHECK_THROWS_AS(make_counter_timer(4, 16), PreconditionError);
}

TEST_CASE("one-step counter has no running states") {
  const auto c = make_counter_timer(4, 1);
  CHECK(c.running().empty());
  CHECK(c.duration() == 1);
  CHECK(validate_null_constructor(c).ok());
}

TEST_CASE("particle timer") {
  const auto p = make_particle_timer(64, 1, 5);
  CHECK(p.duration() == 5);
  CHECK(make_particle_timer(64, 2, 10).duration() == 5);
  CHECK(validate_null_constructor(make_particle_timer(30, 3, 12)).ok());
  CHECK_THROWS_AS(make_particle_timer(64, 2, 5), PreconditionError);
  CHECK_THROWS_AS(make_particle_timer(64, 0, 5), PreconditionError);
  CHECK_THROWS_AS(make_particle_timer(64, 1, 64), PreconditionError);
}

TEST_CASE("durations agree with plain stepping") {
  auto r = gen::rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = gen::timer(r, "t");
    CHECK(t.duration() == brute_duration(t));
    CHECK(validate_null_constructor(t).ok());
  }
}

TEST_CASE("staggered and simultaneous halting") {
  const auto c5 = make_counter_timer(4, 5, "C5");
  const auto c7 = make_counter_timer(4, 7, "C7");
  const auto c5b = make_counter_timer(6, 5, "C5b");
  CHECK(check_staggered_halt(c5, c7));
  CHECK_FALSE(check_staggered_halt(c7, c5));
  CHECK_THROWS_AS(check_staggered_halt(c5, c5b), PreconditionError);
  CHECK(check_simultaneous_halt(c5, c5b));
  CHECK(check_simultaneous_halt(c5, make_particle_timer(64, 1, 5)));
  CHECK_FALSE(check_simultaneous_halt(c5, c7));
  // a timer against itself runs on a fresh instance
  CHECK(check_simultaneous_halt(c5, c5));
}

TEST_CASE("halting relations follow durations") {
  auto r = gen::rng(32);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = gen::timer(r, "a");
    const auto b = gen::timer(r, "b");
    const StepCount da = brute_duration(a), db = brute_duration(b);
    CHECK(check_simultaneous_halt(a, b) == (da == db));
    if (da != db) CHECK(check_staggered_halt(a, b) == (da < db));
  }
}

TEST_CASE("composite timers") {
  const auto c5 = make_counter_timer(4, 5, "C5");
  const auto c7 = make_counter_timer(4, 7, "C7");
  const auto k = composite_timer(c5, c7);
  CHECK(k.name() == "[C5 + C7]");
  CHECK(k.duration() == 5);
  CHECK(k.substrate().size() == 256);
  CHECK(validate_null_constructor(k).ok());
  // completed means (1, R): c7 still running
  for (StateId s : k.one().members()) {
    CHECK(c5.one().contains(s / 16));
    CHECK(c7.running().contains(s % 16));
  }
  const auto same = composite_timer(c5, make_counter_timer(6, 5, "C5b"));
  CHECK(same.one().size() == 11 * 59);
  CHECK_THROWS_AS(composite_timer(c7, c5), PreconditionError);
  const auto self = composite_timer(c5, c5);
  CHECK(self.duration() == 5);
  CHECK_FALSE(self.substrate().same_instance(compose_substrates(c5.substrate(), c5.substrate().instantiate())));
}

TEST_CASE("classification of the four-timer catalog") {
  const auto classes = classify_timers(four_timers());
  REQUIRE(classes.size() == 2);
  CHECK(classes[0].duration == 5);
  CHECK(names(classes)[0] == std::vector<std::string>{"C5a", "C5b", "P5"});
  CHECK(names(classes)[1] == std::vector<std::string>{"C7"});
  CHECK(classify_timers({make_counter_timer(3, 2)}).size() == 1);
  CHECK_THROWS_AS(classify_timers({}), PreconditionError);
}

TEST_CASE("classification is a partition by duration") {
  auto r = gen::rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<TimerSpec> cat;
    for (int i = 0; i < 8; ++i) cat.push_back(gen::timer(r, "t" + std::to_string(i)));
    const auto classes = classify_timers(cat);
    std::map<StepCount, std::size_t> by_duration;
    for (const auto& t : cat) ++by_duration[brute_duration(t)];
    REQUIRE(classes.size() == by_duration.size());
    std::size_t total = 0;
    for (const auto& c : classes) {
      CHECK(c.members.size() == by_duration[c.duration]);
      for (const auto& m : c.members) CHECK(m.duration() == c.duration);
      total += c.members.size();
    }
    CHECK(total == cat.size());
    auto shuffled = cat;
    std::shuffle(shuffled.begin(), shuffled.end(), r);
    CHECK(names(classify_timers(shuffled)) == names(classes));
  }
}

TEST_CASE("invalid timers are rejected by classification") {
  const auto s = Substrate::with_identity("S", {"a", "b", "c"});
  const TimerSpec frozen("frozen", TimerKind::Custom, Attribute("0", s, {0}), Attribute("R", s, {1}),
                         Attribute("1", s, {2}), Attribute("halt", s, {2}));
  CHECK_THROWS_AS(classify_timers({frozen}), PreconditionError);
}

TEST_CASE("recurrence and synchrony") {
  for (unsigned n = 3; n <= 8; ++n) {
    const auto c = make_counter_timer(n, 2);
    CHECK(recurrence_horizon(c) == StepCount{1} << n);
    CHECK(check_synchrony(c));
  }
  const auto p = make_particle_timer(12, 3, 6);
  CHECK(recurrence_horizon(p) == 12 / std::gcd(12, 3));
  CHECK(check_synchrony(p, 1000));
  CHECK_THROWS_AS(check_synchrony(make_counter_timer(4, 5), make_counter_timer(4, 6)),
                  PreconditionError);
}

TEST_CASE("null-constructor checks") {
  const auto s = Substrate::rotation("S", 8, 1);
  auto report = [&](std::vector<StateId> zero, std::vector<StateId> running,
                    std::vector<StateId> one, std::vector<StateId> halt) {
    return validate_null_constructor(TimerSpec("k", TimerKind::Custom, Attribute("0", s, zero),
                                               Attribute("R", s, running), Attribute("1", s, one),
                                               Attribute("halt", s, halt)));
  };
  CHECK(report({0}, {1, 2}, {3, 4, 5}, {3, 4, 5}).ok());
  CHECK(report({0}, {1, 2}, {3, 4, 5}, {4, 5}).failures() ==
        std::vector<std::string>{"halt_at_completion"});
  CHECK(report({0, 1}, {2}, {3, 4}, {3, 4}).failures() ==
        std::vector<std::string>{"uniform_duration", "run_order"});
  CHECK(report({0}, {1, 2, 3}, {3, 4}, {3, 4}).failures() ==
        std::vector<std::string>{"attributes_disjoint"});
  const auto none = report({}, {1}, {3}, {3}).failures();
  CHECK(none.front() == "zero_preparable");
  CHECK(report({0}, {1, 2}, {3, 4, 5}, {0, 1, 2, 3, 4, 5, 6, 7}).failures() ==
        std::vector<std::string>{"halt_distinguishable", "halt_at_completion"});
}

TEST_CASE("explicit horizon longer than the dwell fails") {
  const auto s = Substrate::rotation("S", 8, 1);
  const TimerSpec t("k", TimerKind::Custom, Attribute("0", s, {0}), Attribute("R", s, {1}),
                    Attribute("1", s, {2, 3}), Attribute("halt", s, {2, 3}), StepCount{5});
  CHECK(t.horizon() == 5);
  CHECK(validate_null_constructor(t).failures() ==
        std::vector<std::string>{"one_static_for_horizon", "run_order"});
}
