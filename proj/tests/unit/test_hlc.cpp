#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "psmon/error.hpp"
#include "psmon/hlc.hpp"
#include "psmon/simulator.hpp"

using namespace psmon;

namespace {

// Straight transcription of the HLC update rules, kept independent of the
// library code.
HlcTimestamp ref_local(HlcTimestamp cur, Tick pt) {
  const Tick l = std::max(cur.l, pt);
  return {l, l == cur.l ? cur.c + 1 : 0};
}

HlcTimestamp ref_receive(HlcTimestamp cur, HlcTimestamp m, Tick pt) {
  const Tick l = std::max({cur.l, m.l, pt});
  std::int64_t c = 0;
  if (l == cur.l && l == m.l) c = std::max(cur.c, m.c) + 1;
  else if (l == cur.l) c = cur.c + 1;
  else if (l == m.l) c = m.c + 1;
  return {l, c};
}

}  // namespace

TEST_CASE("local and send events") {
  CHECK(advance_local({10, 0}, 12) == HlcTimestamp{12, 0});
  CHECK(advance_local({20, 3}, 15) == HlcTimestamp{20, 4});
  CHECK(advance_local({0, 0}, 0) == HlcTimestamp{0, 1});
}

TEST_CASE("receive events") {
  CHECK(advance_receive({10, 0}, {20, 0}, 10) == HlcTimestamp{20, 1});
  CHECK(advance_receive({50, 0}, {51, 0}, 54) == HlcTimestamp{54, 0});
  CHECK(advance_receive({30, 2}, {30, 5}, 29) == HlcTimestamp{30, 6});
  CHECK(advance_receive({30, 7}, {25, 9}, 20) == HlcTimestamp{30, 8});
}

TEST_CASE("lexicographic order") {
  CHECK(hlc_less({50, 0}, {55, 0}));
  CHECK_FALSE(hlc_less({50, 1}, {50, 1}));
  CHECK(hlc_less({50, 2}, {50, 3}));
  CHECK(hlc_less({49, 99}, {50, 0}));
  CHECK(successor({7, 2}) == HlcTimestamp{7, 3});
}

TEST_CASE("text form") {
  CHECK(HlcTimestamp{51, 0}.to_string() == "51.0");
  CHECK(HlcTimestamp::parse("100.3") == HlcTimestamp{100, 3});
  std::ostringstream os;
  os << HlcTimestamp{4, 1};
  CHECK(os.str() == "<4,1>");
  CHECK_THROWS_AS(HlcTimestamp::parse("12"), Error);
  CHECK_THROWS_AS(HlcTimestamp::parse("a.b"), Error);
  CHECK_THROWS_AS(HlcTimestamp::parse("1.-2"), Error);
}

TEST_CASE("counter overflow is reported") {
  CHECK_THROWS_AS(advance_local({5, std::numeric_limits<std::int64_t>::max()}, 5), Error);
}

TEST_CASE("property: updates match the reference rules and stay monotone") {
  Rng rng(2024);
  for (int trial = 0; trial < 20000; ++trial) {
    HlcTimestamp cur{rng.range(0, 50), rng.range(0, 5)};
    const Tick pt = rng.range(0, 60);
    const HlcTimestamp loc = advance_local(cur, pt);
    REQUIRE(loc == ref_local(cur, pt));
    REQUIRE(hlc_less(cur, loc));
    REQUIRE(loc.l >= pt);

    HlcTimestamp msg{rng.range(0, 60), rng.range(0, 5)};
    const HlcTimestamp rcv = advance_receive(cur, msg, pt);
    REQUIRE(rcv == ref_receive(cur, msg, pt));
    REQUIRE(hlc_less(cur, rcv));
    REQUIRE(hlc_less(msg, rcv));
    REQUIRE(rcv.l == std::max({cur.l, msg.l, pt}));
  }
}
