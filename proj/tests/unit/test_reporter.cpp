#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <sstream>

#include "fixtures.hpp"
#include "psmon/reporter.hpp"

using namespace psmon;

TEST_CASE("variable and message reports") {
  const auto first = report_var_change(1, 0, {0, 0}, {45, 0});
  CHECK(first == VarReport{1, 0, {0, 0}, {45, 0}});
  const auto second = report_var_change(1, 1, {45, 0}, {50, 0});
  CHECK(second == VarReport{1, 1, {45, 0}, {50, 0}});
  CHECK_THROWS_AS(report_var_change(1, 0, {45, 0}, {45, 0}), Error);

  CHECK(report_message(1, {51, 0}, 2, {54, 0}) == MsgReport{1, {51, 0}, 2, {54, 0}});
  CHECK(report_message(3, {100, 2}, 1, {100, 3}) == MsgReport{3, {100, 2}, 1, {100, 3}});
  CHECK_THROWS_AS(report_message(1, {54, 0}, 2, {51, 0}), Error);
}

TEST_CASE("closing intervals at the horizon") {
  const Trace t = fixtures::TraceBuilder(3, 10, 70).change(1, {45, 0}, 1).change(2, {55, 0}, 1).change(3, {65, 0}, 1).build();
  const auto closing = finalize_open_intervals(t, {60, 0});
  REQUIRE(closing.size() == 3);
  CHECK(closing[0] == VarReport{1, 1, {45, 0}, {60, 0}});
  CHECK(closing[1] == VarReport{2, 1, {55, 0}, {60, 0}});
  CHECK(closing[2].from == HlcTimestamp{0, 0});  // its change lies beyond the horizon
  CHECK(closing[2].old_value == 0);

  const Trace quiet = fixtures::TraceBuilder(1, 10, 70).build();
  const auto whole = finalize_open_intervals(quiet, {70, 0});
  REQUIRE(whole.size() == 1);
  CHECK(whole[0] == VarReport{1, 0, {0, 0}, {70, 0}});
}

TEST_CASE("token scenario report stream") {
  const auto reports = reports_from_trace(fixtures::token_scenario(true, 10));
  std::vector<std::string> lines;
  for (const auto& r : reports) lines.push_back(to_json_line(r));
  const std::vector<std::string> expected{
      R"({"type":"var","proc":1,"old":0,"interval":["0.0","45.0"]})",
      R"({"type":"var","proc":1,"old":1,"interval":["45.0","50.0"]})",
      R"({"type":"msg","from":1,"sent":"51.0","to":2,"recv":"54.0"})",
      R"({"type":"var","proc":2,"old":0,"interval":["0.0","55.0"]})",
      R"({"type":"var","proc":2,"old":1,"interval":["55.0","60.0"]})",
      R"({"type":"var","proc":1,"old":0,"interval":["50.0","70.0"]})",
      R"({"type":"var","proc":2,"old":0,"interval":["60.0","70.0"]})",
  };
  CHECK(lines == expected);
}

TEST_CASE("property: variable reports tile each process timeline") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    ScenarioConfig c;
    c.n = 5;
    c.duration = 800;
    c.epsilon = 20;
    c.mfr = 0.03;
    c.seed = seed;
    c.workload = SyntheticWorkload{0.05, 5, ValueDomain::Boolean};
    const Trace t = run(c);
    const auto reports = reports_from_trace(t);
    std::map<ProcessId, HlcTimestamp> cover;
    for (const auto& r : reports)
      if (const auto* v = std::get_if<VarReport>(&r)) {
        REQUIRE(v->from == cover[v->proc]);
        REQUIRE(hlc_less(v->from, v->to));
        REQUIRE(v->old_value == value_at(t, v->proc, v->from));
        cover[v->proc] = v->to;
      }
    for (int p = 1; p <= t.n; ++p) REQUIRE(cover[p] == HlcTimestamp{t.horizon, 0});

    // The monitor-side reconstruction carries the same values and messages.
    const Trace back = trace_from_reports(reports, t.epsilon, t.n);
    REQUIRE_NOTHROW(validate(back));
    REQUIRE(back.horizon == t.horizon);
    REQUIRE(back.messages.size() == t.messages.size());
    for (int p = 1; p <= t.n; ++p)
      for (const auto& e : t.of(p)) REQUIRE(value_at(back, p, e.hlc) == value_at(t, p, e.hlc));
  }
}

TEST_CASE("delivery keeps every channel in order") {
  ScenarioConfig c;
  c.n = 6;
  c.duration = 3000;
  c.mfr = 0.02;
  const auto reports = reports_from_trace(run(c));
  const auto delivered = deliver(reports, 500, 9);
  REQUIRE(delivered.size() == reports.size());
  std::map<ProcessId, HlcTimestamp> last;
  Tick prev_arrival = 0;
  for (const auto& d : delivered) {
    CHECK(d.arrival >= prev_arrival);
    prev_arrival = d.arrival;
    CHECK(d.arrival >= emitted_at(d.report).l);
    const auto ch = channel_of(d.report);
    CHECK_FALSE(emitted_at(d.report) < last[ch]);
    last[ch] = emitted_at(d.report);
  }
}

TEST_CASE("JSONL round trip and errors") {
  const auto reports = reports_from_trace(fixtures::token_scenario(true, 10));
  std::stringstream ss;
  write_jsonl(ss, reports);
  const auto back = read_jsonl(ss);
  REQUIRE(back.size() == reports.size());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(to_json_line(back[i]) == to_json_line(reports[i]));

  const auto boolean = parse_json_line(R"({"type":"var","proc":2,"old":true,"interval":["1.0","2.3"]})");
  CHECK(std::get<VarReport>(boolean) == VarReport{2, 1, {1, 0}, {2, 3}});

  std::stringstream broken(R"({"type":"var","proc":1,"old":0,"interval":["0.0","4.0"]})"
                           "\n{\"type\":\"msg\",\"from\":1}\n");
  try {
    read_jsonl(broken);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_json_line(R"({"type":"bogus"})"), Error);
  CHECK_THROWS_AS(parse_json_line("not json"), Error);
}

TEST_CASE("reconstruction rejects gaps") {
  std::vector<ReportMessage> gap{VarReport{1, 0, {0, 0}, {5, 0}}, VarReport{1, 1, {6, 0}, {9, 0}}};
  CHECK_THROWS_AS(trace_from_reports(gap, 3), Error);
  std::vector<ReportMessage> late{VarReport{1, 0, {2, 0}, {5, 0}}};
  CHECK_THROWS_AS(trace_from_reports(late, 3), Error);
}
