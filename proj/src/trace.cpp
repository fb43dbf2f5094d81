#include "psmon/trace.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "psmon/error.hpp"

namespace psmon {

std::size_t Trace::event_count() const {
  std::size_t total = 0;
  for (const auto& list : events) total += list.size();
  return total;
}

std::int64_t Trace::max_counter() const {
  std::int64_t c = 0;
  for (const auto& list : events)
    for (const auto& e : list) c = std::max(c, e.hlc.c);
  for (const auto& m : messages) c = std::max({c, m.send.c, m.recv.c});
  return c;
}

void validate(const Trace& trace) {
  auto fail = [](const std::string& why) { throw Error("invalid trace: " + why); };
  if (trace.n < 1) fail("process count must be positive");
  if (trace.epsilon < 0) fail("negative epsilon");
  if (static_cast<int>(trace.events.size()) != trace.n) fail("event lists do not match process count");
  if (static_cast<int>(trace.initial.size()) != trace.n) fail("initial values do not match process count");

  std::map<std::int64_t, std::pair<const Event*, const Event*>> ends;
  for (int p = 1; p <= trace.n; ++p) {
    const auto& list = trace.of(p);
    int value = trace.initial[static_cast<std::size_t>(p - 1)];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Event& e = list[i];
      std::string where = "P" + std::to_string(p) + " event " + std::to_string(i);
      if (e.process != p) fail(where + " filed under the wrong process");
      if (e.hlc.l < 0 || e.hlc.c < 0) fail(where + " has a negative timestamp");
      if (e.hlc.l >= trace.horizon) fail(where + " lies beyond the horizon");
      if (i > 0 && !hlc_less(list[i - 1].hlc, e.hlc)) fail(where + " does not advance the HLC");
      if (i > 0 && e.pt < list[i - 1].pt) fail(where + " moves the physical clock backwards");
      if (e.kind == EventKind::VarChange) {
        if (e.old_value != value) fail(where + " changes from a value the variable does not hold");
        value = e.new_value;
      }
      if (e.kind == EventKind::Send || e.kind == EventKind::Receive) {
        auto& slot = ends[e.msg_id];
        auto& end = e.kind == EventKind::Send ? slot.first : slot.second;
        if (end) fail("message " + std::to_string(e.msg_id) + " has duplicate endpoints");
        end = &e;
      }
    }
  }
  if (ends.size() != trace.messages.size()) fail("message table does not match send/receive events");
  for (const auto& m : trace.messages) {
    auto it = ends.find(m.id);
    if (it == ends.end() || !it->second.first || !it->second.second)
      fail("message " + std::to_string(m.id) + " lacks a send or receive event");
    const Event& s = *it->second.first;
    const Event& r = *it->second.second;
    if (s.process != m.sender || r.process != m.receiver || s.hlc != m.send || r.hlc != m.recv)
      fail("message " + std::to_string(m.id) + " disagrees with its events");
    if (!hlc_less(m.send, m.recv)) fail("message " + std::to_string(m.id) + " received before it was sent");
  }
}

int value_at(const Trace& trace, ProcessId p, const HlcTimestamp& at) {
  int value = trace.initial.at(static_cast<std::size_t>(p - 1));
  for (const auto& e : trace.of(p)) {
    if (at < e.hlc) break;
    if (e.kind == EventKind::VarChange) value = e.new_value;
  }
  return value;
}

Trace excerpt(const Trace& trace, Tick from, Tick to) {
  if (from < 0 || to <= from) throw Error("excerpt range must be non-empty");
  const HlcTimestamp lo{from, 0};
  const HlcTimestamp hi{to, 0};
  auto shift = [from](HlcTimestamp ts) { return HlcTimestamp{ts.l - from, ts.c}; };

  Trace out;
  out.n = trace.n;
  out.epsilon = trace.epsilon;
  out.horizon = to - from;
  out.events.resize(static_cast<std::size_t>(trace.n));
  std::map<std::int64_t, bool> kept;
  for (const auto& m : trace.messages) {
    bool keep = !(m.send < lo) && m.recv < hi;
    kept[m.id] = keep;
    if (keep) out.messages.push_back({m.id, m.sender, shift(m.send), m.receiver, shift(m.recv)});
  }
  for (int p = 1; p <= trace.n; ++p) {
    out.initial.push_back(value_at(trace, p, lo));
    for (const auto& e : trace.of(p)) {
      if (e.hlc < lo || !(e.hlc < hi)) continue;
      Event copy = e;
      copy.hlc = shift(e.hlc);
      copy.pt = std::max<Tick>(0, e.pt - from);
      if ((e.kind == EventKind::Send || e.kind == EventKind::Receive) && !kept[e.msg_id]) {
        copy.kind = EventKind::Local;
        copy.msg_id = -1;
      }
      out.events[static_cast<std::size_t>(p - 1)].push_back(copy);
    }
  }
  return out;
}

CausalOrder::CausalOrder(const Trace& trace, ClockSource clock) : trace_(&trace) {
  const auto n = static_cast<std::size_t>(trace.n);
  offset_.assign(n + 1, 0);
  for (std::size_t p = 0; p < n; ++p) offset_[p + 1] = offset_[p] + trace.events[p].size();
  const std::size_t total = offset_[n];
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t i = 0; i < trace.events[p].size(); ++i) refs_.push_back({static_cast<ProcessId>(p + 1), i});

  auto clock_of = [clock](const Event& e) { return clock == ClockSource::Physical ? e.pt : e.hlc.l; };

  // Running maximum of the clock per process, so the first event past a
  // threshold can be found by binary search.
  std::vector<std::vector<Tick>> prefix_max(n);
  for (std::size_t p = 0; p < n; ++p) {
    Tick best = std::numeric_limits<Tick>::min();
    for (const auto& e : trace.events[p]) prefix_max[p].push_back(best = std::max(best, clock_of(e)));
  }

  std::map<std::int64_t, std::size_t> receive_of;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t i = 0; i < trace.events[p].size(); ++i)
      if (trace.events[p][i].kind == EventKind::Receive) receive_of[trace.events[p][i].msg_id] = offset_[p] + i;

  std::vector<std::vector<std::size_t>> succ(total);
  std::vector<std::size_t> indegree(total, 0);
  auto add_edge = [&](std::size_t a, std::size_t b) {
    succ[a].push_back(b);
    ++indegree[b];
  };
  for (std::size_t p = 0; p < n; ++p) {
    const auto& list = trace.events[p];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::size_t a = offset_[p] + i;
      if (i + 1 < list.size()) add_edge(a, a + 1);
      if (list[i].kind == EventKind::Send) {
        auto it = receive_of.find(list[i].msg_id);
        if (it != receive_of.end()) add_edge(a, it->second);
      }
      // Later events on q follow the first qualifying one by local order.
      const Tick threshold = clock_of(list[i]) + trace.epsilon;
      for (std::size_t q = 0; q < n; ++q) {
        if (q == p) continue;
        auto it = std::upper_bound(prefix_max[q].begin(), prefix_max[q].end(), threshold);
        if (it != prefix_max[q].end())
          add_edge(a, offset_[q] + static_cast<std::size_t>(it - prefix_max[q].begin()));
      }
    }
  }

  std::vector<std::size_t> order;
  order.reserve(total);
  for (std::size_t v = 0; v < total; ++v)
    if (indegree[v] == 0) order.push_back(v);
  for (std::size_t head = 0; head < order.size(); ++head)
    for (std::size_t s : succ[order[head]])
      if (--indegree[s] == 0) order.push_back(s);
  if (order.size() != total) throw Error("happened-before graph contains a cycle");

  words_ = (total + 63) / 64;
  reach_.assign(total * words_, 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    std::uint64_t* row = &reach_[*it * words_];
    for (std::size_t s : succ[*it]) {
      const std::uint64_t* other = &reach_[s * words_];
      for (std::size_t w = 0; w < words_; ++w) row[w] |= other[w];
      row[s / 64] |= std::uint64_t{1} << (s % 64);
    }
  }
}

std::size_t CausalOrder::flat(EventRef r) const {
  if (r.process < 1 || r.process > trace_->n) throw Error("event reference names an unknown process");
  const auto p = static_cast<std::size_t>(r.process - 1);
  if (r.index >= trace_->events[p].size()) throw Error("event reference is not in the trace");
  return offset_[p] + r.index;
}

bool CausalOrder::happened_before(EventRef a, EventRef b) const {
  const std::size_t from = flat(a);
  const std::size_t to = flat(b);
  return (reach_[from * words_ + to / 64] >> (to % 64)) & 1U;
}

bool happened_before(const Trace& trace, EventRef a, EventRef b) {
  return CausalOrder(trace).happened_before(a, b);
}

Predicate Predicate::cnf(std::vector<Clause> clauses) {
  Predicate p = make(PredicateForm::Cnf);
  p.clauses = std::move(clauses);
  return p;
}

std::string Predicate::to_string() const {
  switch (form) {
    case PredicateForm::Conjunction: return "conj";
    case PredicateForm::ExactlyK: return "exactly:" + std::to_string(k);
    case PredicateForm::AtLeastK: return "atleast:" + std::to_string(k);
    case PredicateForm::SumEq: return "sumeq:" + std::to_string(k);
    case PredicateForm::SumGeq: return "sumgeq:" + std::to_string(k);
    case PredicateForm::PairwiseConflict: return "conflict";
    case PredicateForm::Cnf: return "cnf";
  }
  return "?";
}

Predicate Predicate::parse(const std::string& text) {
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  auto arg = [&]() {
    if (colon == std::string::npos) throw Error("predicate '" + text + "' needs a count, e.g. " + head + ":5");
    try {
      std::size_t used = 0;
      int k = std::stoi(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1 || k < 0) throw Error("");
      return k;
    } catch (const std::exception&) {
      throw Error("bad count in predicate '" + text + "'");
    }
  };
  if (head == "conj" && colon == std::string::npos) return conjunction();
  if (head == "conflict" && colon == std::string::npos) return pairwise_conflict();
  if (head == "exactly") return exactly(arg());
  if (head == "atleast") return at_least(arg());
  if (head == "sumeq") return sum_eq(arg());
  if (head == "sumgeq") return sum_geq(arg());
  throw Error("unknown predicate '" + text + "'");
}

bool eval_predicate(const Predicate& p, std::span<const int> values) {
  for (int v : values)
    if (v != 0 && v != 1) throw Error("predicate value outside {0,1}: " + std::to_string(v));
  const int n = static_cast<int>(values.size());
  const int count = std::accumulate(values.begin(), values.end(), 0);
  auto check_k = [&] {
    if (p.k < 0 || p.k > n) throw Error("predicate threshold " + std::to_string(p.k) + " outside 0.." + std::to_string(n));
  };
  switch (p.form) {
    case PredicateForm::Conjunction: return count == n;
    case PredicateForm::ExactlyK: check_k(); return count == p.k;
    case PredicateForm::AtLeastK: check_k(); return count >= p.k;
    case PredicateForm::SumEq: check_k(); return count == p.k;
    case PredicateForm::SumGeq: check_k(); return count >= p.k;
    case PredicateForm::PairwiseConflict: return count >= 2;
    case PredicateForm::Cnf:
      for (const auto& clause : p.clauses) {
        bool sat = false;
        for (int lit : clause) {
          const int var = std::abs(lit);
          if (var < 1 || var > n) throw Error("CNF literal " + std::to_string(lit) + " names no process");
          sat = sat || (values[static_cast<std::size_t>(var - 1)] == (lit > 0 ? 1 : 0));
        }
        if (!sat) return false;
      }
      return true;
  }
  return false;
}

std::vector<int> SnapshotAssignment::values() const {
  std::vector<int> out;
  for (const auto& e : entries) out.push_back(e.value);
  return out;
}

bool is_consistent(const SnapshotAssignment& s, const Trace& trace) {
  if (static_cast<int>(s.entries.size()) != trace.n) throw Error("snapshot must hold one entry per process");
  Tick lo = std::numeric_limits<Tick>::max();
  Tick hi = std::numeric_limits<Tick>::min();
  for (const auto& e : s.entries) {
    lo = std::min(lo, e.at.l);
    hi = std::max(hi, e.at.l);
  }
  if (hi - lo > trace.epsilon) return false;
  for (const auto& m : trace.messages) {
    const auto& receiver = s.entries[static_cast<std::size_t>(m.receiver - 1)].at;
    const auto& sender = s.entries[static_cast<std::size_t>(m.sender - 1)].at;
    if (!(receiver < m.recv) && !(m.send < sender)) return false;
  }
  return true;
}

bool is_valid(const SnapshotAssignment& s, const Trace& trace, const Predicate& p) {
  if (!is_consistent(s, trace)) return false;
  for (int q = 1; q <= trace.n; ++q) {
    const auto& e = s.entries[static_cast<std::size_t>(q - 1)];
    if (e.at.l < 0 || e.at.l >= trace.horizon) return false;
    if (value_at(trace, q, e.at) != e.value) return false;
  }
  return eval_predicate(p, s.values());
}

}  // namespace psmon
