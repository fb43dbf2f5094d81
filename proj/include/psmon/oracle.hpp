#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <vector>

#include "psmon/trace.hpp"

namespace psmon {

struct OracleLimits {
  int max_processes = 4;
  Tick max_ticks = 40;
  std::size_t max_events_per_process = 6;
};

/// Throws Error when the trace is too large for exhaustive search.
void check_limits(const Trace& trace, const OracleLimits& limits);

// Valid-snapshot search by exhaustive enumeration of frontier timestamps
// <l, c> with 0 <= l < horizon and 0 <= c <= c_max + 1, where c_max is the
// largest counter in the trace. Larger counters compare exactly like
// c_max + 1 against every event of the trace, so the range is complete.
//
// Each process's timestamp range is cut into regions at its own variable
// changes, receives, and the instant after each of its sends; within a
// region the variable value and every message condition are fixed, so only
// the l range of the region matters for clock synchronization. Regions are
// enumerated depth-first with incremental pruning on clock and message
// constraints.
//
// All three entry points return the same verdict; the two region-based
// ones also return the same witness (the first in region order).

/// OpenMP-parallel over the regions of process 1.
std::optional<SnapshotAssignment> find_valid_snapshot(const Trace& trace, const Predicate& p, Tick epsilon,
                                                      const OracleLimits& limits = {});

/// Serial reference for find_valid_snapshot.
std::optional<SnapshotAssignment> find_valid_snapshot_serial(const Trace& trace, const Predicate& p, Tick epsilon,
                                                             const OracleLimits& limits = {});

/// Tick-by-tick enumeration of every frontier timestamp, checked with
/// is_consistent. Only for very small traces.
std::optional<SnapshotAssignment> find_valid_snapshot_exhaustive(const Trace& trace, const Predicate& p, Tick epsilon,
                                                                 const OracleLimits& limits = {});

/// Every value vector some consistent snapshot exhibits.
std::set<std::vector<int>> reachable_valuations(const Trace& trace, Tick epsilon, const OracleLimits& limits = {});

struct Cnf {
  int num_vars = 0;
  std::vector<Clause> clauses;
};

/// DIMACS CNF: optional `c` comment lines, a `p cnf V C` header, then
/// clauses as zero-terminated literal lists.
Cnf parse_dimacs(std::istream& in);

/// Brute-force truth-table satisfiability.
bool cnf_satisfiable(const Cnf& cnf);

/// A no-message trace with one process per variable: each variable starts
/// false and turns true once at a distinct tick inside (0, epsilon). A
/// valid snapshot exists iff the formula is satisfiable.
struct SatInstance {
  Trace trace;
  Predicate predicate;
  std::vector<Tick> flip_ticks;  // per process
};

SatInstance gen_satisfiability_instance(const Cnf& formula, Tick epsilon, std::uint64_t seed);

/// The consistent snapshot whose values equal `assignment`: each process is
/// cut just before its flip (false) or at it (true).
SnapshotAssignment snapshot_for_assignment(const SatInstance& instance, const std::vector<int>& assignment);

}  // namespace psmon
