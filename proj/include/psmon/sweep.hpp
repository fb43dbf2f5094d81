#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "psmon/monitor.hpp"

namespace psmon {

/// Parameter varied by a sweep, in the units used on the command line.
enum class SweepAxis {
  Mfr,       // messages per second per process
  Delta,     // maximum message delay, ms
  Beta,      // per-tick change probability
  Interval,  // minimum hold time between changes, ms
  Epsilon,   // clock skew bound, ms
};

const char* to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& text);

/// Sets the axis to `value` on a copy of `base`. Throws Error for values out
/// of range or an axis the workload does not have.
ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, double value);

struct SweepRow {
  double value = 0.0;
  std::size_t runs = 0;  // seeds that completed
  std::size_t windows = 0;
  std::size_t sat = 0;
  std::size_t unsat = 0;
  std::size_t errors = 0;
  double mean_solver_s = 0.0;  // per window
  double mean_encode_s = 0.0;
  double max_solver_s = 0.0;
  std::string failure;  // first failure at this point, empty when none
};

struct SweepSpec {
  SweepAxis axis = SweepAxis::Mfr;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds{1};
};

/// Runs monitor_run for every value and seed. A point whose runs throw is
/// recorded with its failure and the sweep moves on.
std::vector<SweepRow> sweep(const SweepSpec& plan, const ScenarioConfig& base, const MonitorWindowing& windowing,
                            const Predicate& predicate, const EncoderConfig& encoder, const SolverRunner& solver,
                            const RunOptions& options = {});

void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows);

}  // namespace psmon
