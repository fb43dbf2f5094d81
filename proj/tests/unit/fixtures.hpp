#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "psmon/error.hpp"
#include "psmon/oracle.hpp"
#include "psmon/simulator.hpp"
#include "psmon/solver.hpp"
#include "psmon/trace.hpp"

namespace fixtures {

using namespace psmon;

/// Builds small traces by hand. Events are stamped with pt = l and sorted
/// per process by HLC when the trace is taken.
class TraceBuilder {
 public:
  TraceBuilder(int n, Tick epsilon, Tick horizon) {
    t_.n = n;
    t_.epsilon = epsilon;
    t_.horizon = horizon;
    t_.initial.assign(static_cast<std::size_t>(n), 0);
    t_.events.resize(static_cast<std::size_t>(n));
  }

  TraceBuilder& initial(ProcessId p, int value) {
    t_.initial[static_cast<std::size_t>(p - 1)] = value;
    return *this;
  }

  TraceBuilder& change(ProcessId p, HlcTimestamp at, int new_value) {
    Event e;
    e.process = p;
    e.kind = EventKind::VarChange;
    e.pt = at.l;
    e.hlc = at;
    e.new_value = new_value;
    list(p).push_back(e);
    return *this;
  }

  TraceBuilder& message(ProcessId sender, HlcTimestamp send, ProcessId receiver, HlcTimestamp recv) {
    const auto id = static_cast<std::int64_t>(t_.messages.size());
    t_.messages.push_back({id, sender, send, receiver, recv});
    Event s;
    s.process = sender;
    s.kind = EventKind::Send;
    s.pt = send.l;
    s.hlc = send;
    s.msg_id = id;
    list(sender).push_back(s);
    Event r = s;
    r.process = receiver;
    r.kind = EventKind::Receive;
    r.pt = recv.l;
    r.hlc = recv;
    list(receiver).push_back(r);
    return *this;
  }

  Trace build() const {
    Trace t = t_;
    for (int p = 1; p <= t.n; ++p) {
      auto& l = t.events[static_cast<std::size_t>(p - 1)];
      std::sort(l.begin(), l.end(), [](const Event& a, const Event& b) { return a.hlc < b.hlc; });
      int value = t.initial[static_cast<std::size_t>(p - 1)];
      for (auto& e : l)
        if (e.kind == EventKind::VarChange) {
          e.old_value = value;
          value = e.new_value;
        }
    }
    validate(t);
    return t;
  }

 private:
  std::vector<Event>& list(ProcessId p) { return t_.events[static_cast<std::size_t>(p - 1)]; }
  Trace t_;
};

/// Two processes passing a token: P1 holds it in [45, 50), P2 in [55, 60).
/// With `with_message`, P1 hands it over in a message sent at <51,0> and
/// received at <54,0>.
inline Trace token_scenario(bool with_message, Tick epsilon) {
  TraceBuilder b(2, epsilon, 70);
  b.change(1, {45, 0}, 1).change(1, {50, 0}, 0).change(2, {55, 0}, 1).change(2, {60, 0}, 0);
  if (with_message) b.message(1, {51, 0}, 2, {54, 0});
  return b.build();
}

/// Random small scenario within the default oracle limits, or nullopt when
/// the draw exceeds them.
inline std::optional<Trace> small_random_trace(std::uint64_t seed) {
  Rng rng(seed * 7919 + 17);
  ScenarioConfig c;
  c.n = static_cast<int>(rng.range(2, 4));
  c.epsilon = rng.range(1, 8);
  c.delta = rng.range(1, 6);
  c.duration = rng.range(12, 30);
  c.mfr = 0.02 + 0.06 * rng.uniform();
  c.seed = seed;
  c.workload = SyntheticWorkload{0.05 + 0.1 * rng.uniform(), rng.range(1, 5), ValueDomain::Boolean};
  Trace t = run(c);
  try {
    check_limits(t, OracleLimits{});
  } catch (const Error&) {
    return std::nullopt;
  }
  return t;
}

/// Consistency straight from the happened-before definition: each frontier
/// becomes a local event placed after every event it has observed, and the
/// frontiers must be pairwise concurrent in the closure over logical time.
inline bool consistent_by_definition(const SnapshotAssignment& s, const Trace& trace) {
  Trace aug = trace;
  std::vector<std::size_t> frontier_index;
  for (int p = 1; p <= trace.n; ++p) {
    auto& list = aug.events[static_cast<std::size_t>(p - 1)];
    for (auto& e : list) e.pt = e.hlc.l;
    const HlcTimestamp at = s.entries[static_cast<std::size_t>(p - 1)].at;
    // A send stamped exactly at the frontier is not observed by it; any other
    // event stamped there is.
    auto pos = std::find_if(list.begin(), list.end(), [&](const Event& e) {
      return at < e.hlc || (e.hlc == at && e.kind == EventKind::Send);
    });
    Event f;
    f.process = p;
    f.kind = EventKind::Local;
    f.pt = at.l;
    f.hlc = at;
    frontier_index.push_back(static_cast<std::size_t>(pos - list.begin()));
    list.insert(pos, f);
  }
  CausalOrder order(aug, ClockSource::Logical);
  for (int i = 1; i <= trace.n; ++i)
    for (int j = i + 1; j <= trace.n; ++j)
      if (!order.concurrent({i, frontier_index[static_cast<std::size_t>(i - 1)]},
                            {j, frontier_index[static_cast<std::size_t>(j - 1)]}))
        return false;
  return true;
}

inline SolverRunner test_solver() { return SolverRunner(PSMON_TEST_SOLVER, std::chrono::seconds(60)); }

}  // namespace fixtures
