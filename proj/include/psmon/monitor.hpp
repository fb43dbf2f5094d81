#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "psmon/encoder.hpp"
#include "psmon/reporter.hpp"
#include "psmon/simulator.hpp"
#include "psmon/solver.hpp"

namespace psmon {

/// Window k covers snapshot times with l in [k * period, (k + 1) * period +
/// overlap). With overlap >= epsilon, every consistent snapshot fits
/// entirely inside some window.
struct MonitorWindowing {
  Tick period = 100000;
  std::optional<Tick> overlap;  // defaults to epsilon

  Tick overlap_or(Tick epsilon) const { return overlap.value_or(epsilon); }
};

struct MonitorReport {
  std::size_t window = 0;
  Window range;
  Verdict verdict = Verdict::Error;
  std::optional<SnapshotAssignment> witness;
  double solver_seconds = 0.0;
  double encode_seconds = 0.0;
  std::size_t var_reports = 0;
  std::size_t msg_reports = 0;
  Tick verdict_tick = 0;  // arrival tick of the report that completed the window
  std::optional<Tick> latency;  // verdict_tick - latest frontier l of the witness
  std::string diagnostics;

  std::string to_json_line() const;
};

struct MonitorOptions {
  bool parallel = true;  // solve ready windows concurrently
  std::string dump_dir;  // write each window's SMT-LIB2 script here when set
};

/// Ingests reports in arrival order and decides each window once every
/// process has reported past its end. Per-process channels must be FIFO;
/// interleaving across processes only shifts when windows become ready.
class Monitor {
 public:
  Monitor(int n, EncoderConfig encoder, MonitorWindowing windowing, Predicate predicate, SolverRunner solver,
          MonitorOptions options = {});

  void ingest(const ReportMessage& report, Tick arrival);

  /// Solves windows that became ready since the last call.
  std::vector<MonitorReport> poll();

  /// Ends the stream: closes the remaining windows at the reported horizon
  /// and solves them. Throws if some process never reported up to it.
  std::vector<MonitorReport> finish();

  /// Encodes one window from the reports ingested so far.
  ConstraintScript script_for(const Window& window) const;

 private:
  struct Pending {
    std::size_t index;
    Window range;
    Tick verdict_tick;
  };

  Window nominal(std::size_t k) const;
  void release_ready(Tick arrival);
  std::vector<MonitorReport> solve(const std::vector<Pending>& batch) const;
  MonitorReport solve_one(const Pending& w) const;

  int n_;
  EncoderConfig encoder_;
  MonitorWindowing windowing_;
  Predicate predicate_;
  SolverRunner solver_;
  MonitorOptions options_;

  std::vector<VarReport> vars_;
  std::vector<MsgReport> msgs_;
  std::vector<HlcTimestamp> coverage_;  // per process, end of reported intervals
  std::size_t next_window_ = 0;
  bool done_ = false;  // a released window already reaches the horizon
  Tick last_arrival_ = 0;
  std::vector<Pending> ready_;
};

struct RunOptions {
  Tick link_delay = 0;  // max extra ticks a report spends in transit
  MonitorOptions monitor;
};

/// Simulates the scenario, streams its reports to a Monitor, and returns one
/// report per window in window order. The encoder epsilon is taken from the
/// scenario.
std::vector<MonitorReport> monitor_run(const ScenarioConfig& config, const MonitorWindowing& windowing,
                                       const Predicate& predicate, EncoderConfig encoder, const SolverRunner& solver,
                                       const RunOptions& options = {});

/// Same, over an already recorded trace.
std::vector<MonitorReport> monitor_trace(const Trace& trace, const MonitorWindowing& windowing,
                                         const Predicate& predicate, EncoderConfig encoder, const SolverRunner& solver,
                                         const RunOptions& options = {}, std::uint64_t seed = 0);

/// Monitoring cost as machines: `c` is solver seconds per simulated second.
struct CapacityEstimate {
  double c = 0.0;
  int standalone_monitors = 0;  // ceil(c), at least one
  double combined_fraction = 0.0;  // share of each process devoted to monitoring, c / (n + c)
};

CapacityEstimate capacity_from_cost(double c, int n);
CapacityEstimate capacity_estimate(const std::vector<MonitorReport>& reports, double simulated_seconds, int n);

}  // namespace psmon
