#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "psmon/encoder.hpp"

using namespace psmon;

namespace {

EncoderConfig plain(Tick eps) {
  EncoderConfig c;
  c.epsilon = eps;
  return c;
}

EncoderConfig folded(Tick eps, std::int64_t c_prime) {
  EncoderConfig c;
  c.epsilon = eps;
  c.combine = true;
  c.c_prime = c_prime;
  return c;
}

}  // namespace

TEST_CASE("clock synchronization assertions") {
  const auto two = encode_clock_sync(2, plain(1000), 1);
  REQUIRE(two.size() == 1);
  CHECK(two[0] == "(and (<= (- l_1 l_2) 1000) (<= (- l_2 l_1) 1000))");
  const auto comb = encode_clock_sync(2, folded(1000, 4), 4);
  REQUIRE(comb.size() == 1);
  CHECK(comb[0] == "(and (<= (- nl_1 nl_2) 4000) (<= (- nl_2 nl_1) 4000))");
  CHECK(encode_clock_sync(1, plain(10), 1).empty());
  CHECK(encode_clock_sync(5, plain(10), 1).size() == 10);
}

TEST_CASE("communication assertions") {
  const MsgReport m{1, {51, 0}, 2, {54, 0}};
  CHECK(encode_communication(m, plain(10), 4) ==
        "(=> (or (> l_2 54) (and (= l_2 54) (>= c_2 0))) (or (> l_1 51) (and (= l_1 51) (> c_1 0))))");
  CHECK(encode_communication(m, folded(10, 4), 4) == "(=> (>= nl_2 216) (> nl_1 204))");
  CHECK(4 * 54 + 0 == 216);
  CHECK(4 * 51 + 0 == 204);
  CHECK_THROWS_AS(encode_communication({1, {51, 4}, 2, {54, 0}}, folded(10, 4), 4), EncodingError);
}

TEST_CASE("variable event assertions") {
  const VarReport r{1, 1, {45, 0}, {50, 0}};
  CHECK(encode_var_event(r, plain(10), 4) ==
        "(=> (and (or (> l_1 45) (and (= l_1 45) (>= c_1 0))) (or (< l_1 50) (and (= l_1 50) (< c_1 0)))) (= v_1 1))");
  CHECK(encode_var_event(r, folded(10, 4), 4) == "(=> (and (>= nl_1 180) (< nl_1 200)) (= v_1 1))");
}

TEST_CASE("predicate assertions") {
  CHECK(encode_predicate(Predicate::conjunction(), 3) == "(and (= v_1 1) (= v_2 1) (= v_3 1))");
  CHECK(encode_predicate(Predicate::sum_geq(10), 10) ==
        "(>= (+ v_1 v_2 v_3 v_4 v_5 v_6 v_7 v_8 v_9 v_10) 10)");
  CHECK(encode_predicate(Predicate::pairwise_conflict(), 2) == "(and (= v_1 1) (= v_2 1))");
  CHECK(encode_predicate(Predicate::pairwise_conflict(), 3) ==
        "(or (and (= v_1 1) (= v_2 1)) (and (= v_1 1) (= v_3 1)) (and (= v_2 1) (= v_3 1)))");
  CHECK(encode_predicate(Predicate::exactly(1), 2) == "(= (+ (ite (= v_1 1) 1 0) (ite (= v_2 1) 1 0)) 1)");
  CHECK(encode_predicate(Predicate::at_least(2), 2) == "(>= (+ (ite (= v_1 1) 1 0) (ite (= v_2 1) 1 0)) 2)");
  CHECK(encode_predicate(Predicate::sum_eq(0), 1) == "(= v_1 0)");
  CHECK(encode_predicate(Predicate::cnf({{1, -2}, {3}}), 3) == "(and (or (= v_1 1) (= v_2 0)) (= v_3 1))");
  CHECK(encode_predicate(Predicate::pairwise_conflict(), 1) == "false");
  CHECK_THROWS_AS(encode_predicate(Predicate::cnf({{4}}), 3), EncodingError);
}

TEST_CASE("choice of c'") {
  CHECK(choose_c_prime(plain(1), 0) == 4);
  CHECK(choose_c_prime(plain(1), 2) == 4);
  CHECK(choose_c_prime(plain(1), 5) == 7);
  CHECK(choose_c_prime(folded(1, 4), 3) == 4);
  CHECK_THROWS_AS(choose_c_prime(folded(1, 4), 4), EncodingError);
}

TEST_CASE("script families and counts") {
  const Trace b = fixtures::token_scenario(true, 10);
  const auto s = encode_trace(b, Predicate::pairwise_conflict(), plain(10));
  CHECK(s.declarations.size() == 6);
  CHECK(s.clock_sync.size() == 1);
  CHECK(s.communication.size() == 1);
  CHECK(s.var_events.size() == 6);
  const auto text = s.render();
  CHECK(text.rfind("(set-logic QF_LIA)\n", 0) == 0);
  CHECK(text.find("(declare-const l_1 Int)") != std::string::npos);
  CHECK(text.find("(assert (and (<= 0 l_1) (< l_1 70)))") != std::string::npos);
  CHECK(text.ends_with("\n(check-sat)\n(get-model)\n"));

  const auto c = encode_trace(b, Predicate::pairwise_conflict(), folded(10, 4));
  CHECK(c.declarations.size() == 4);
  CHECK(c.render().find("(assert (and (<= 0 nl_1) (< nl_1 280)))") != std::string::npos);
}

TEST_CASE("rendering ignores report order") {
  ScenarioConfig cfg;
  cfg.n = 4;
  cfg.duration = 2000;
  cfg.mfr = 0.02;
  cfg.epsilon = 50;
  const Trace t = run(cfg);
  std::vector<VarReport> vars;
  std::vector<MsgReport> msgs;
  for (const auto& r : reports_from_trace(t)) {
    if (const auto* v = std::get_if<VarReport>(&r)) vars.push_back(*v);
    else msgs.push_back(std::get<MsgReport>(r));
  }
  const Window w{0, t.horizon};
  const auto first = encode_window(t.n, vars, msgs, Predicate::exactly(2), w, plain(50)).render();
  std::mt19937 g(5);
  std::shuffle(vars.begin(), vars.end(), g);
  std::shuffle(msgs.begin(), msgs.end(), g);
  CHECK(encode_window(t.n, vars, msgs, Predicate::exactly(2), w, plain(50)).render() == first);
}

TEST_CASE("malformed windows are rejected") {
  CHECK_THROWS_AS(encode_window(2, {}, {}, Predicate::conjunction(), {5, 5}, plain(1)), EncodingError);
  const std::vector<VarReport> stray{{3, 0, {0, 0}, {4, 0}}};
  CHECK_THROWS_AS(encode_window(2, stray, {}, Predicate::conjunction(), {0, 10}, plain(1)), EncodingError);
}
