#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "psmon/hlc.hpp"

namespace psmon {

/// Processes are numbered 1..n throughout, matching report and trace files.
using ProcessId = int;

enum class EventKind { Local, VarChange, Send, Receive };

struct Event {
  ProcessId process = 0;
  EventKind kind = EventKind::Local;
  Tick pt = 0;  // local physical clock when the event happened
  HlcTimestamp hlc;
  int old_value = 0;  // VarChange only
  int new_value = 0;  // VarChange only
  std::int64_t msg_id = -1;  // Send/Receive only
};

struct Message {
  std::int64_t id = 0;
  ProcessId sender = 0;
  HlcTimestamp send;
  ProcessId receiver = 0;
  HlcTimestamp recv;
};

/// A recorded execution: one ordered event list per process plus the
/// message table. Every snapshot timestamp of interest lies in
/// [<0,0>, <horizon,0>).
struct Trace {
  int n = 0;
  Tick epsilon = 0;
  Tick horizon = 0;
  std::vector<int> initial;  // value of each variable at <0,0>
  std::vector<std::vector<Event>> events;  // events[p - 1] for process p
  std::vector<Message> messages;

  const std::vector<Event>& of(ProcessId p) const { return events.at(static_cast<std::size_t>(p - 1)); }
  std::size_t event_count() const;
  std::int64_t max_counter() const;
};

/// Throws Error describing the first broken trace invariant.
void validate(const Trace& trace);

/// Value of process p's variable at snapshot time `at`.
int value_at(const Trace& trace, ProcessId p, const HlcTimestamp& at);

/// Restricts a trace to snapshot times with l in [from, to) and shifts all
/// timestamps down by `from`. Messages whose constraint cannot bind inside
/// the range are dropped.
Trace excerpt(const Trace& trace, Tick from, Tick to);

struct EventRef {
  ProcessId process = 0;
  std::size_t index = 0;
  friend bool operator==(const EventRef&, const EventRef&) = default;
};

enum class ClockSource { Physical, Logical };

/// Reachability closure of the happened-before relation over all events of a
/// trace: local order, send -> receive, and the clock-synchronization rule
/// (clock(B) - clock(A) > epsilon across processes), closed transitively.
///
/// The clock used by the synchronization rule is the physical clock `pt` by
/// default; `Logical` substitutes the HLC l value, which is how the monitor
/// observes time.
class CausalOrder {
 public:
  explicit CausalOrder(const Trace& trace, ClockSource clock = ClockSource::Physical);

  bool happened_before(EventRef a, EventRef b) const;
  bool concurrent(EventRef a, EventRef b) const { return !happened_before(a, b) && !happened_before(b, a); }
  std::size_t size() const { return refs_.size(); }
  EventRef ref(std::size_t flat) const { return refs_[flat]; }

 private:
  std::size_t flat(EventRef r) const;

  const Trace* trace_;
  std::vector<std::size_t> offset_;
  std::vector<EventRef> refs_;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> reach_;  // row-major bitsets
};

/// Single-query form of CausalOrder.
bool happened_before(const Trace& trace, EventRef a, EventRef b);

enum class PredicateForm { Conjunction, ExactlyK, AtLeastK, SumEq, SumGeq, PairwiseConflict, Cnf };
enum class ValueDomain { Boolean, Integer };

/// DIMACS-style literal: +i means v_i true, -i means v_i false (1-based).
using Clause = std::vector<int>;

struct Predicate {
  PredicateForm form = PredicateForm::Conjunction;
  int k = 0;
  ValueDomain domain = ValueDomain::Boolean;
  std::vector<Clause> clauses;  // Cnf only

  static Predicate conjunction() { return make(PredicateForm::Conjunction); }
  static Predicate exactly(int k) { return make(PredicateForm::ExactlyK, k); }
  static Predicate at_least(int k) { return make(PredicateForm::AtLeastK, k); }
  static Predicate sum_eq(int k) { return make(PredicateForm::SumEq, k, ValueDomain::Integer); }
  static Predicate sum_geq(int k) { return make(PredicateForm::SumGeq, k, ValueDomain::Integer); }
  static Predicate pairwise_conflict() { return make(PredicateForm::PairwiseConflict); }
  static Predicate cnf(std::vector<Clause> clauses);
  static Predicate make(PredicateForm form, int k = 0, ValueDomain domain = ValueDomain::Boolean) {
    Predicate p;
    p.form = form;
    p.k = k;
    p.domain = domain;
    return p;
  }

  /// Textual form used on the command line: conj, exactly:K, atleast:K,
  /// sumeq:K, sumgeq:K, conflict.
  std::string to_string() const;
  static Predicate parse(const std::string& text);
};

/// Evaluates `p` over one value per process. Values must be 0 or 1.
bool eval_predicate(const Predicate& p, std::span<const int> values);

struct SnapshotEntry {
  HlcTimestamp at;
  int value = 0;
  friend bool operator==(const SnapshotEntry&, const SnapshotEntry&) = default;
};

/// One frontier timestamp and variable value per process (index p - 1).
struct SnapshotAssignment {
  std::vector<SnapshotEntry> entries;

  std::vector<int> values() const;
  friend bool operator==(const SnapshotAssignment&, const SnapshotAssignment&) = default;
};

/// True iff all frontier l values lie within epsilon of each other and no
/// message is received before the frontier of its receiver while sent at or
/// after the frontier of its sender.
bool is_consistent(const SnapshotAssignment& s, const Trace& trace);

/// Consistent, carries the trace's actual variable values, and satisfies `p`.
bool is_valid(const SnapshotAssignment& s, const Trace& trace, const Predicate& p);

}  // namespace psmon
