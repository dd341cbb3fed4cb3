#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/generators.hpp"
#include "tasklaw/core_model.hpp"

using namespace tasklaw;

namespace {

// Naive repeated stepping.
StateId walk(const Substrate& s, StateId x, StepCount n) {
  for (StepCount i = 0; i < n; ++i) x = s.step(x);
  return x;
}

// Smallest k > 0 with step^k = id, found by iterating the whole map.
StepCount brute_period(const Substrate& s) {
  std::vector<StateId> cur(s.size());
  std::iota(cur.begin(), cur.end(), StateId{0});
  for (StepCount k = 1;; ++k) {
    for (auto& c : cur) c = s.step(c);
    bool id = true;
    for (StateId i = 0; i < s.size(); ++i) id = id && cur[i] == i;
    if (id) return k;
  }
}

// Minimum over entries into x of the steps x is kept afterwards.
std::optional<StepCount> brute_horizon(const Attribute& x) {
  const Substrate& s = x.substrate();
  std::optional<StepCount> best;
  for (StateId prev = 0; prev < s.size(); ++prev) {
    const StateId e = s.step(prev);
    if (x.contains(prev) || !x.contains(e)) continue;
    StepCount k = 0;
    StateId t = s.step(e);
    while (x.contains(t) && k <= s.size()) {
      ++k;
      t = s.step(t);
    }
    best = best ? std::min(*best, k) : k;
  }
  return best;
}

}  // namespace

TEST_CASE("state space") {
  StateSpace sp("S", {"a", "b", "c"});
  CHECK(sp.size() == 3);
  CHECK(sp.index_of("c") == 2);
  CHECK(sp.contains("b"));
  CHECK_FALSE(sp.contains("d"));
  CHECK_THROWS_AS(sp.index_of("d"), ModelError);
  CHECK_THROWS_AS(StateSpace("S", {"a", "a"}), ModelError);
  CHECK_THROWS_AS(StateSpace("S", {}), ModelError);
}

TEST_CASE("step map must be a bijection") {
  StateSpace sp("S", {"a", "b", "c"});
  CHECK_THROWS_AS(Substrate("S", sp, {1, 1, 0}), ModelError);
  CHECK_THROWS_AS(Substrate("S", sp, {1, 2}), ModelError);
  CHECK_THROWS_AS(Substrate("S", sp, {1, 2, 3}), ModelError);
  const Substrate ok("S", sp, {1, 2, 0});
  CHECK(ok.preimage(0) == 2);
  CHECK(ok.period() == 3);
}

TEST_CASE("rotation and identity") {
  const auto r = Substrate::rotation("R", 8, 3);
  CHECK(r.step(6) == 1);
  CHECK(r.period() == 8);
  CHECK(evolve(r, "1", 5) == "0");
  const auto id = Substrate::with_identity("I", {"x", "y"});
  CHECK(id.period() == 1);
  CHECK(id.cycles().size() == 2);
}

TEST_CASE("evolve agrees with repeated stepping") {
  auto r = gen::rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = gen::substrate(r, gen::between(r, 1, 40));
    const StateId x = static_cast<StateId>(gen::between(r, 0, s.size() - 1));
    const StepCount n = gen::between(r, 0, 500);
    CHECK(evolve(s, x, n) == walk(s, x, n));
  }
}

TEST_CASE("period is the order of the step map") {
  auto r = gen::rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = gen::substrate(r, gen::between(r, 1, 12));
    CHECK(s.period() == brute_period(s));
    for (StateId x = 0; x < s.size(); ++x) {
      CHECK(walk(s, x, s.cycle_length(x)) == x);
    }
  }
}

TEST_CASE("composition is the product dynamics") {
  auto r = gen::rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = gen::substrate(r, gen::between(r, 1, 7), "A");
    const auto b = gen::substrate(r, gen::between(r, 1, 7), "B");
    const auto c = compose_substrates(a, b);
    REQUIRE(c.size() == a.size() * b.size());
    for (StateId i = 0; i < a.size(); ++i) {
      for (StateId j = 0; j < b.size(); ++j) {
        const StateId s = static_cast<StateId>(i * b.size() + j);
        CHECK(c.step(s) == a.step(i) * b.size() + b.step(j));
        CHECK(c.label(s) == "(" + a.label(i) + "," + b.label(j) + ")");
      }
    }
    CHECK(c.first().same_instance(a));
    CHECK(c.second().same_instance(b));
  }
}

TEST_CASE("instances and shared atoms") {
  const auto a = Substrate::rotation("A", 4, 1);
  const auto copy = a;
  const auto fresh = a.instantiate();
  CHECK(a.same_instance(copy));
  CHECK_FALSE(a.same_instance(fresh));
  CHECK(std::ranges::equal(a.step_map(), fresh.step_map()));
  CHECK_THROWS_AS(compose_substrates(a, copy), PreconditionError);
  const auto ab = compose_substrates(a, fresh);
  CHECK(ab.shares_atom(a));
  CHECK_THROWS_AS(compose_substrates(ab, a), PreconditionError);
  CHECK_FALSE(ab.same_instance(ab.tagged("t")));
  CHECK(ab.same_instance(compose_substrates(a, fresh)));
}

TEST_CASE("attributes") {
  const auto s = Substrate::with_identity("S", {"a", "b", "c"});
  const auto x = Attribute::from_labels("x", s, {"c", "a", "a"});
  CHECK(x.members() == std::vector<StateId>{0, 2});
  CHECK(x.complement("nx").members() == std::vector<StateId>{1});
  CHECK_THROWS_AS(Attribute::from_labels("x", s, {"d"}), ModelError);
  const auto other = s.instantiate();
  const auto moved = x.rehomed(other);
  CHECK(moved.substrate().same_instance(other));
  CHECK(moved.members() == x.members());
  CHECK_FALSE(moved.same_set(x));
}

TEST_CASE("pair attributes") {
  const auto a = Substrate::rotation("A", 3, 1);
  const auto b = Substrate::rotation("B", 2, 1);
  const auto c = compose_substrates(a, b);
  const auto p = pair_attributes(c, Attribute("x", a, {1, 2}), Attribute("y", b, {0}));
  CHECK(p.members() == std::vector<StateId>{2, 4});
  CHECK(p.name() == "(x, y)");
}

TEST_CASE("staticity") {
  const auto id = Substrate::with_identity("I", {"a", "b"});
  CHECK(is_static(Attribute::from_labels("x", id, {"a"})));
  const auto r = Substrate::rotation("R", 6, 1);
  CHECK_FALSE(is_static(Attribute("x", r, {0})));
  CHECK(is_static(Attribute::full(r)));
  CHECK_FALSE(static_horizon(Attribute::full(r)).has_value());
  CHECK(static_horizon(Attribute("x", r, {2, 3, 4})) == StepCount{2});
  CHECK(is_static_for_horizon(Attribute("x", r, {2, 3, 4}), 2));
  CHECK_FALSE(is_static_for_horizon(Attribute("x", r, {2, 3, 4}), 3));
}

TEST_CASE("static horizon matches a brute-force dwell") {
  auto r = gen::rng(14);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = gen::substrate(r, gen::between(r, 1, 16));
    const auto x = gen::attribute(r, s);
    const auto h = static_horizon(x);
    CHECK(h == brute_horizon(x));
    CHECK(h.has_value() != is_static(x));
    const StepCount probe = gen::between(r, 0, 16);
    CHECK(is_static_for_horizon(x, probe) == (!h || probe <= *h));
  }
}

TEST_CASE("distinguishability") {
  const auto s = Substrate::with_identity("S", {"a", "b", "c"});
  const std::vector<Attribute> disjoint{Attribute("x", s, {0}), Attribute("y", s, {1, 2})};
  const std::vector<Attribute> overlap{Attribute("x", s, {0, 1}), Attribute("y", s, {1})};
  CHECK(are_distinguishable(disjoint));
  CHECK_FALSE(are_distinguishable(overlap));
  CHECK_THROWS_AS(are_distinguishable(std::span(disjoint).first(1)), PreconditionError);
  const std::vector<Attribute> mixed{Attribute("x", s, {0}), Attribute("y", s.instantiate(), {1})};
  CHECK_THROWS_AS(are_distinguishable(mixed), PreconditionError);
}

TEST_CASE("variables") {
  const auto r = Substrate::rotation("R", 4, 1);
  Variable v{"v", r, {}, {}};
  v.entries.emplace(0, Attribute("a", r, {0}));
  v.entries.emplace(1, Attribute("b", r, {1}));
  CHECK_NOTHROW(v.validate());
  CHECK(v.at(1).members() == std::vector<StateId>{1});
  v.entries.emplace(2, Attribute("c", r, {1, 2}));
  CHECK_THROWS_AS(v.validate(), ModelError);

  const auto id = Substrate::with_identity("I", {"p", "q"});
  Variable stopped{"w", id, {}, {}};
  stopped.entries.emplace(0, Attribute("p", id, {0}));
  CHECK_THROWS_AS(stopped.validate(), ModelError);
  stopped.static_entries.push_back(0);
  CHECK_NOTHROW(stopped.validate());
}
