#include "psmon/oracle.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <limits>
#include <numeric>
#include <sstream>

#include "psmon/error.hpp"
#include "psmon/simulator.hpp"

namespace psmon {

namespace {

struct Region {
  HlcTimestamp lo;
  HlcTimestamp hi;
  int value = 0;
  // Per message: for its receiver, whether the region lies at or after the
  // receive; for its sender, whether it lies strictly after the send.
  std::vector<char> flag;
};

class RegionSearch {
 public:
  RegionSearch(const Trace& trace, Tick epsilon) : trace_(trace), epsilon_(epsilon) {
    const std::int64_t top_c = trace.max_counter() + 1;
    const HlcTimestamp end{trace.horizon, 0};
    auto pred = [top_c](const HlcTimestamp& t) { return t.c > 0 ? HlcTimestamp{t.l, t.c - 1} : HlcTimestamp{t.l - 1, top_c}; };

    const auto& msgs = trace.messages;
    regions_.resize(static_cast<std::size_t>(trace.n));
    for (int p = 1; p <= trace.n; ++p) {
      std::vector<HlcTimestamp> cuts{{0, 0}};
      for (const auto& e : trace.of(p))
        if (e.kind == EventKind::VarChange) cuts.push_back(e.hlc);
      for (const auto& m : msgs) {
        if (m.receiver == p) cuts.push_back(m.recv);
        if (m.sender == p) cuts.push_back(successor(m.send));
      }
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
      cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](const HlcTimestamp& t) { return !(t < end); }), cuts.end());
      cuts.push_back(end);

      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Region r;
        r.lo = cuts[i];
        r.hi = pred(cuts[i + 1]);
        if (r.hi < r.lo) continue;
        r.value = value_at(trace, p, r.lo);
        r.flag.assign(msgs.size(), 0);
        for (std::size_t m = 0; m < msgs.size(); ++m) {
          if (msgs[m].receiver == p) r.flag[m] = !(r.lo < msgs[m].recv);
          if (msgs[m].sender == p) r.flag[m] = msgs[m].send < r.lo;
        }
        regions_[static_cast<std::size_t>(p - 1)].push_back(std::move(r));
      }
    }
    checks_.resize(static_cast<std::size_t>(trace.n));
    for (std::size_t m = 0; m < msgs.size(); ++m)
      checks_[static_cast<std::size_t>(std::max(msgs[m].sender, msgs[m].receiver) - 1)].push_back(m);
  }

  std::size_t first_level_size() const { return regions_.empty() ? 0 : regions_[0].size(); }

  /// Depth-first over region choices with process 1 fixed to `first`.
  /// `leaf` receives the chosen region indices and returns true to stop.
  template <typename Leaf>
  bool search_from(std::size_t first, Leaf&& leaf) const {
    std::vector<std::size_t> chosen(regions_.size());
    chosen[0] = first;
    const Region& r = regions_[0][first];
    return dfs(1, chosen, r.lo.l, r.hi.l, leaf);
  }

  template <typename Leaf>
  bool search_all(Leaf&& leaf) const {
    for (std::size_t i = 0; i < first_level_size(); ++i)
      if (search_from(i, leaf)) return true;
    return false;
  }

  std::vector<int> values(const std::vector<std::size_t>& chosen) const {
    std::vector<int> out;
    for (std::size_t k = 0; k < chosen.size(); ++k) out.push_back(regions_[k][chosen[k]].value);
    return out;
  }

  SnapshotAssignment witness(const std::vector<std::size_t>& chosen) const {
    Tick anchor = std::numeric_limits<Tick>::min();
    for (std::size_t k = 0; k < chosen.size(); ++k) anchor = std::max(anchor, regions_[k][chosen[k]].lo.l);
    SnapshotAssignment s;
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      const Region& r = regions_[k][chosen[k]];
      const Tick l = std::clamp(anchor, r.lo.l, r.hi.l);
      s.entries.push_back({l == r.lo.l ? r.lo : HlcTimestamp{l, 0}, r.value});
    }
    return s;
  }

 private:
  template <typename Leaf>
  bool dfs(std::size_t k, std::vector<std::size_t>& chosen, Tick max_lo, Tick min_hi, Leaf& leaf) const {
    if (k == regions_.size()) return leaf(chosen);
    const auto& msgs = trace_.messages;
    for (std::size_t i = 0; i < regions_[k].size(); ++i) {
      const Region& r = regions_[k][i];
      const Tick lo = std::max(max_lo, r.lo.l);
      const Tick hi = std::min(min_hi, r.hi.l);
      if (lo - hi > epsilon_) continue;
      chosen[k] = i;
      bool ok = true;
      for (std::size_t m : checks_[k]) {
        const auto& rr = regions_[static_cast<std::size_t>(msgs[m].receiver - 1)][chosen[static_cast<std::size_t>(msgs[m].receiver - 1)]];
        const auto& rs = regions_[static_cast<std::size_t>(msgs[m].sender - 1)][chosen[static_cast<std::size_t>(msgs[m].sender - 1)]];
        if (rr.flag[m] && !rs.flag[m]) {
          ok = false;
          break;
        }
      }
      if (ok && dfs(k + 1, chosen, lo, hi, leaf)) return true;
    }
    return false;
  }

  const Trace& trace_;
  Tick epsilon_;
  std::vector<std::vector<Region>> regions_;
  std::vector<std::vector<std::size_t>> checks_;  // messages decided once process k is chosen
};

Trace with_epsilon(const Trace& trace, Tick epsilon) {
  Trace copy = trace;
  copy.epsilon = epsilon;
  return copy;
}

void self_check(const std::optional<SnapshotAssignment>& w, const Trace& trace, const Predicate& p, Tick epsilon) {
  if (w && !is_valid(*w, with_epsilon(trace, epsilon), p))
    throw Error("internal error: oracle witness is not a valid snapshot");
}

}  // namespace

void check_limits(const Trace& trace, const OracleLimits& limits) {
  if (trace.n > limits.max_processes)
    throw Error("oracle limit: " + std::to_string(trace.n) + " processes > " + std::to_string(limits.max_processes));
  if (trace.horizon > limits.max_ticks)
    throw Error("oracle limit: horizon " + std::to_string(trace.horizon) + " ticks > " + std::to_string(limits.max_ticks));
  for (int p = 1; p <= trace.n; ++p)
    if (trace.of(p).size() > limits.max_events_per_process)
      throw Error("oracle limit: P" + std::to_string(p) + " has " + std::to_string(trace.of(p).size()) + " events > " +
                  std::to_string(limits.max_events_per_process));
}

std::optional<SnapshotAssignment> find_valid_snapshot_serial(const Trace& trace, const Predicate& p, Tick epsilon,
                                                             const OracleLimits& limits) {
  check_limits(trace, limits);
  RegionSearch search(trace, epsilon);
  std::optional<SnapshotAssignment> found;
  search.search_all([&](const std::vector<std::size_t>& chosen) {
    if (!eval_predicate(p, search.values(chosen))) return false;
    found = search.witness(chosen);
    return true;
  });
  self_check(found, trace, p, epsilon);
  return found;
}

std::optional<SnapshotAssignment> find_valid_snapshot(const Trace& trace, const Predicate& p, Tick epsilon,
                                                      const OracleLimits& limits) {
  check_limits(trace, limits);
  RegionSearch search(trace, epsilon);
  const auto count = static_cast<std::int64_t>(search.first_level_size());
  std::vector<std::optional<SnapshotAssignment>> found(static_cast<std::size_t>(count));
  std::atomic<std::int64_t> best{count};

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    if (i > best.load(std::memory_order_relaxed)) continue;
    auto& slot = found[static_cast<std::size_t>(i)];
    bool hit = search.search_from(static_cast<std::size_t>(i), [&](const std::vector<std::size_t>& chosen) {
      if (!eval_predicate(p, search.values(chosen))) return false;
      slot = search.witness(chosen);
      return true;
    });
    if (hit) {
      std::int64_t cur = best.load();
      while (i < cur && !best.compare_exchange_weak(cur, i)) {
      }
    }
  }

  std::optional<SnapshotAssignment> out;
  if (best.load() < count) out = found[static_cast<std::size_t>(best.load())];
  self_check(out, trace, p, epsilon);
  return out;
}

std::optional<SnapshotAssignment> find_valid_snapshot_exhaustive(const Trace& trace, const Predicate& p, Tick epsilon,
                                                                 const OracleLimits& limits) {
  check_limits(trace, limits);
  const Trace view = with_epsilon(trace, epsilon);
  const std::int64_t top_c = trace.max_counter() + 1;
  std::vector<HlcTimestamp> candidates;
  for (Tick l = 0; l < trace.horizon; ++l)
    for (std::int64_t c = 0; c <= top_c; ++c) candidates.push_back({l, c});

  SnapshotAssignment s;
  s.entries.resize(static_cast<std::size_t>(trace.n));
  std::optional<SnapshotAssignment> found;
  auto dfs = [&](auto& self, int k, Tick lo, Tick hi) -> bool {
    if (k == trace.n) {
      for (int q = 1; q <= trace.n; ++q)
        s.entries[static_cast<std::size_t>(q - 1)].value = value_at(trace, q, s.entries[static_cast<std::size_t>(q - 1)].at);
      if (is_consistent(s, view) && eval_predicate(p, s.values())) {
        found = s;
        return true;
      }
      return false;
    }
    for (const auto& ts : candidates) {
      const Tick nlo = std::min(lo, ts.l);
      const Tick nhi = std::max(hi, ts.l);
      if (nhi - nlo > epsilon) continue;
      s.entries[static_cast<std::size_t>(k)].at = ts;
      if (self(self, k + 1, nlo, nhi)) return true;
    }
    return false;
  };
  dfs(dfs, 0, std::numeric_limits<Tick>::max(), std::numeric_limits<Tick>::min());
  return found;
}

std::set<std::vector<int>> reachable_valuations(const Trace& trace, Tick epsilon, const OracleLimits& limits) {
  check_limits(trace, limits);
  RegionSearch search(trace, epsilon);
  std::set<std::vector<int>> out;
  search.search_all([&](const std::vector<std::size_t>& chosen) {
    out.insert(search.values(chosen));
    return false;
  });
  return out;
}

Cnf parse_dimacs(std::istream& in) {
  Cnf cnf;
  bool header = false;
  int expected = 0;
  Clause current;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first) || first == "c" || first == "%") continue;
    if (first == "p") {
      std::string fmt;
      if (!(ls >> fmt >> cnf.num_vars >> expected) || fmt != "cnf" || cnf.num_vars < 0 || expected < 0)
        throw Error("malformed DIMACS header: " + line);
      header = true;
      continue;
    }
    if (!header) throw Error("DIMACS clauses before the 'p cnf' header");
    std::istringstream all(line);
    for (std::string tok; all >> tok;) {
      int lit = 0;
      try {
        lit = std::stoi(tok);
      } catch (const std::exception&) {
        throw Error("bad DIMACS literal '" + tok + "'");
      }
      if (lit == 0) {
        cnf.clauses.push_back(std::move(current));
        current.clear();
      } else {
        if (std::abs(lit) > cnf.num_vars) throw Error("DIMACS literal " + tok + " exceeds declared variable count");
        current.push_back(lit);
      }
    }
  }
  if (!header) throw Error("missing DIMACS header");
  if (!current.empty()) cnf.clauses.push_back(std::move(current));
  return cnf;
}

bool cnf_satisfiable(const Cnf& cnf) {
  if (cnf.num_vars > 24) throw Error("truth-table check limited to 24 variables");
  std::vector<int> values(static_cast<std::size_t>(cnf.num_vars));
  const auto p = Predicate::cnf(cnf.clauses);
  for (std::uint32_t mask = 0; mask < (1U << cnf.num_vars); ++mask) {
    for (int i = 0; i < cnf.num_vars; ++i) values[static_cast<std::size_t>(i)] = (mask >> i) & 1U;
    if (eval_predicate(p, values)) return true;
  }
  return false;
}

SatInstance gen_satisfiability_instance(const Cnf& formula, Tick epsilon, std::uint64_t seed) {
  const int n = formula.num_vars;
  if (n < 1) throw Error("formula needs at least one variable");
  if (formula.clauses.empty()) throw Error("formula needs at least one clause");
  if (epsilon - 1 < n) throw Error("epsilon too small to place " + std::to_string(n) + " distinct flips inside (0, epsilon)");

  Rng rng(seed);
  std::vector<Tick> ticks(static_cast<std::size_t>(epsilon - 1));
  std::iota(ticks.begin(), ticks.end(), Tick{1});
  for (std::size_t i = ticks.size() - 1; i > 0; --i)
    std::swap(ticks[i], ticks[static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(i)))]);
  ticks.resize(static_cast<std::size_t>(n));

  SatInstance inst;
  inst.flip_ticks = ticks;
  inst.predicate = Predicate::cnf(formula.clauses);
  Trace& t = inst.trace;
  t.n = n;
  t.epsilon = epsilon;
  t.horizon = epsilon;
  t.initial.assign(static_cast<std::size_t>(n), 0);
  t.events.resize(static_cast<std::size_t>(n));
  for (int p = 1; p <= n; ++p) {
    const Tick at = ticks[static_cast<std::size_t>(p - 1)];
    t.events[static_cast<std::size_t>(p - 1)].push_back({p, EventKind::VarChange, at, {at, 0}, 0, 1, -1});
  }
  return inst;
}

SnapshotAssignment snapshot_for_assignment(const SatInstance& instance, const std::vector<int>& assignment) {
  if (assignment.size() != instance.flip_ticks.size()) throw Error("assignment size does not match the instance");
  SnapshotAssignment s;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const Tick flip = instance.flip_ticks[i];
    s.entries.push_back({assignment[i] ? HlcTimestamp{flip, 0} : HlcTimestamp{flip - 1, 0}, assignment[i] ? 1 : 0});
  }
  return s;
}

}  // namespace psmon
