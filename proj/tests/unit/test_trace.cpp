#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fixtures.hpp"

using namespace psmon;
using fixtures::TraceBuilder;

namespace {

// Happened-before by Floyd-Warshall over every edge of the definition,
// including a clock edge for every qualifying cross-process pair.
std::vector<std::vector<bool>> naive_closure(const Trace& t, std::vector<EventRef>& refs) {
  refs.clear();
  for (int p = 1; p <= t.n; ++p)
    for (std::size_t i = 0; i < t.of(p).size(); ++i) refs.push_back({p, i});
  const std::size_t n = refs.size();
  auto ev = [&](std::size_t k) -> const Event& { return t.of(refs[k].process)[refs[k].index]; };
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const Event& A = ev(a);
      const Event& B = ev(b);
      if (A.process == B.process) r[a][b] = refs[a].index < refs[b].index;
      else if (B.pt - A.pt > t.epsilon) r[a][b] = true;
      if (A.kind == EventKind::Send && B.kind == EventKind::Receive && A.msg_id == B.msg_id) r[a][b] = true;
    }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t a = 0; a < n; ++a)
      if (r[a][k])
        for (std::size_t b = 0; b < n; ++b)
          if (r[k][b]) r[a][b] = true;
  return r;
}

Trace random_trace(std::uint64_t seed) {
  Rng rng(seed);
  ScenarioConfig c;
  c.n = static_cast<int>(rng.range(2, 6));
  c.epsilon = rng.range(1, 10);
  c.delta = rng.range(1, 8);
  c.duration = rng.range(10, 40);
  c.mfr = 0.1 * rng.uniform();
  c.seed = seed;
  c.workload = SyntheticWorkload{0.1, 2, ValueDomain::Boolean};
  return run(c);
}

SnapshotAssignment snap(std::vector<HlcTimestamp> at, const Trace& t) {
  SnapshotAssignment s;
  for (std::size_t i = 0; i < at.size(); ++i) s.entries.push_back({at[i], value_at(t, static_cast<int>(i + 1), at[i])});
  return s;
}

}  // namespace

TEST_CASE("happened-before on the token scenarios") {
  for (Tick eps : {1, 5, 10, 100}) {
    const Trace b = fixtures::token_scenario(true, eps);
    CHECK(happened_before(b, {1, 1}, {2, 1}));  // <50,0> before <55,0> through the message
    CHECK_FALSE(happened_before(b, {2, 1}, {1, 1}));
  }
  const Trace a = fixtures::token_scenario(false, 10);
  CHECK(CausalOrder(a).concurrent({1, 1}, {2, 0}));
  const Trace a4 = fixtures::token_scenario(false, 4);
  CHECK(happened_before(a4, {1, 1}, {2, 0}));
}

TEST_CASE("clock synchronization edge") {
  Trace t = TraceBuilder(2, 10, 40).change(1, {10, 0}, 1).change(2, {25, 0}, 1).build();
  CHECK(happened_before(t, {1, 0}, {2, 0}));
  Trace u = TraceBuilder(2, 10, 40).change(1, {10, 0}, 1).change(2, {20, 0}, 1).build();
  CHECK(CausalOrder(u).concurrent({1, 0}, {2, 0}));
}

TEST_CASE("unknown events are rejected") {
  const Trace t = fixtures::token_scenario(false, 10);
  CHECK_THROWS_AS(happened_before(t, {3, 0}, {1, 0}), Error);
  CHECK_THROWS_AS(happened_before(t, {1, 9}, {1, 0}), Error);
}

TEST_CASE("property: closure matches the definition and orders HLCs") {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    const Trace t = random_trace(seed);
    std::vector<EventRef> refs;
    const auto naive = naive_closure(t, refs);
    const CausalOrder order(t);
    REQUIRE(order.size() == refs.size());
    for (std::size_t a = 0; a < refs.size(); ++a) {
      REQUIRE_FALSE(order.happened_before(refs[a], refs[a]));
      for (std::size_t b = 0; b < refs.size(); ++b) {
        const bool hb = order.happened_before(refs[a], refs[b]);
        REQUIRE(hb == naive[a][b]);
        if (hb) {
          REQUIRE(hlc_less(t.of(refs[a].process)[refs[a].index].hlc, t.of(refs[b].process)[refs[b].index].hlc));
          REQUIRE_FALSE(order.happened_before(refs[b], refs[a]));
        }
      }
    }
  }
}

TEST_CASE("consistency examples") {
  const Trace a10 = fixtures::token_scenario(false, 10);
  const Trace a4 = fixtures::token_scenario(false, 4);
  CHECK(is_consistent(snap({{50, 0}, {55, 0}}, a10), a10));
  CHECK_FALSE(is_consistent(snap({{50, 0}, {55, 0}}, a4), a4));
  CHECK(is_consistent(snap({{0, 0}, {0, 0}}, a4), a4));

  const Trace b = fixtures::token_scenario(true, 100);
  CHECK_FALSE(is_consistent(snap({{49, 0}, {55, 0}}, b), b));  // receive seen, send not yet made
  CHECK(is_consistent(snap({{51, 1}, {55, 0}}, b), b));
  CHECK(is_consistent(snap({{49, 0}, {53, 9}}, b), b));
  CHECK_FALSE(is_consistent(snap({{51, 0}, {54, 0}}, b), b));  // send stamped at the frontier is still ahead
  CHECK_THROWS_AS(is_consistent(snap({{0, 0}}, b), b), Error);
}

TEST_CASE("validity needs matching values and the predicate") {
  const Trace a = fixtures::token_scenario(false, 10);
  const Predicate p = Predicate::pairwise_conflict();
  CHECK(is_valid(snap({{49, 0}, {55, 0}}, a), a, p));
  CHECK_FALSE(is_valid(snap({{50, 0}, {55, 0}}, a), a, p));
  SnapshotAssignment lie = snap({{40, 0}, {40, 0}}, a);
  lie.entries[0].value = 1;
  lie.entries[1].value = 1;
  CHECK_FALSE(is_valid(lie, a, p));
}

TEST_CASE("property: consistency agrees with the happened-before definition") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 400; ++seed) {
    auto t = fixtures::small_random_trace(seed);
    if (!t) continue;
    Rng rng(seed);
    const auto cmax = t->max_counter() + 1;
    for (int k = 0; k < 60; ++k) {
      std::vector<HlcTimestamp> at;
      const Tick base = rng.range(0, t->horizon - 1);
      for (int p = 0; p < t->n; ++p)
        at.push_back({std::clamp<Tick>(base + rng.range(-t->epsilon - 1, t->epsilon + 1), 0, t->horizon - 1),
                      rng.range(0, cmax)});
      const auto s = snap(at, *t);
      REQUIRE(is_consistent(s, *t) == fixtures::consistent_by_definition(s, *t));
      ++checked;
    }
  }
  CHECK(checked > 2000);
}

TEST_CASE("predicate evaluation") {
  const std::vector<int> ttt{1, 1, 1};
  CHECK(eval_predicate(Predicate::conjunction(), ttt));
  const std::vector<int> five{1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
  CHECK(eval_predicate(Predicate::exactly(5), five));
  CHECK_FALSE(eval_predicate(Predicate::exactly(4), five));
  CHECK(eval_predicate(Predicate::at_least(4), five));
  const std::vector<int> ftft{0, 1, 0, 1};
  CHECK(eval_predicate(Predicate::pairwise_conflict(), ftft));
  CHECK_FALSE(eval_predicate(Predicate::pairwise_conflict(), std::vector<int>{0, 1, 0, 0}));
  CHECK(eval_predicate(Predicate::sum_geq(2), ftft));
  CHECK(eval_predicate(Predicate::sum_eq(2), ftft));
  CHECK(eval_predicate(Predicate::cnf({{1, -2}, {2, 3}}), std::vector<int>{1, 1, 0}));
  CHECK_FALSE(eval_predicate(Predicate::cnf({{1, -2}, {2, 3}}), std::vector<int>{0, 1, 0}));

  CHECK_THROWS_AS(eval_predicate(Predicate::conjunction(), std::vector<int>{0, 2}), Error);
  CHECK_THROWS_AS(eval_predicate(Predicate::exactly(3), std::vector<int>{0, 1}), Error);
  CHECK_THROWS_AS(eval_predicate(Predicate::cnf({{4}}), std::vector<int>{0, 1}), Error);
}

TEST_CASE("predicate text form") {
  for (const char* text : {"conj", "exactly:5", "atleast:2", "sumeq:3", "sumgeq:10", "conflict"})
    CHECK(Predicate::parse(text).to_string() == text);
  CHECK_THROWS_AS(Predicate::parse("exactly"), Error);
  CHECK_THROWS_AS(Predicate::parse("nonsense"), Error);
}

TEST_CASE("value lookup and validation") {
  const Trace a = fixtures::token_scenario(false, 10);
  CHECK(value_at(a, 1, {44, 9}) == 0);
  CHECK(value_at(a, 1, {45, 0}) == 1);
  CHECK(value_at(a, 1, {50, 0}) == 0);
  CHECK(value_at(a, 2, {59, 3}) == 1);

  Trace bad = a;
  bad.events[0][1].hlc = {44, 0};
  CHECK_THROWS_AS(validate(bad), Error);
  bad = a;
  bad.events[0][0].old_value = 1;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = a;
  bad.horizon = 60;
  CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("excerpt rebases and filters messages") {
  const Trace b = fixtures::token_scenario(true, 10);
  const Trace x = excerpt(b, 40, 60);
  validate(x);
  CHECK(x.horizon == 20);
  CHECK(x.messages.size() == 1);
  CHECK(x.messages[0].send == HlcTimestamp{11, 0});
  const Trace y = excerpt(b, 52, 70);
  validate(y);
  CHECK(y.messages.empty());
  CHECK(y.initial == std::vector<int>{0, 0});
  CHECK(y.of(2)[0].kind == EventKind::Local);
}
