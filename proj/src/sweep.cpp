#include "psmon/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "psmon/error.hpp"

namespace psmon {

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Mfr: return "mfr";
    case SweepAxis::Delta: return "delta";
    case SweepAxis::Beta: return "beta";
    case SweepAxis::Interval: return "interval";
    case SweepAxis::Epsilon: return "epsilon";
  }
  return "?";
}

SweepAxis parse_sweep_axis(const std::string& text) {
  for (auto axis : {SweepAxis::Mfr, SweepAxis::Delta, SweepAxis::Beta, SweepAxis::Interval, SweepAxis::Epsilon})
    if (text == to_string(axis)) return axis;
  throw Error("unknown sweep axis '" + text + "' (expected mfr, delta, beta, interval or epsilon)");
}

ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, double value) {
  if (!std::isfinite(value) || value < 0) throw Error("sweep value must be a non-negative number");
  ScenarioConfig c = base;
  switch (axis) {
    case SweepAxis::Mfr: {
      const double per_tick = value * c.tick_ms / 1000.0;
      if (per_tick > 1.0) throw Error("message rate exceeds one message per tick");
      c.mfr = per_tick;
      break;
    }
    case SweepAxis::Delta:
      c.delta = c.ms_to_ticks(value);
      c.delta_min.reset();
      c.delta_max.reset();
      break;
    case SweepAxis::Beta: {
      auto* w = std::get_if<SyntheticWorkload>(&c.workload);
      if (!w) throw Error("beta applies only to the synthetic workload");
      w->beta = value;
      break;
    }
    case SweepAxis::Interval: {
      auto* w = std::get_if<SyntheticWorkload>(&c.workload);
      if (!w) throw Error("interval applies only to the synthetic workload");
      w->interval = c.ms_to_ticks(value);
      break;
    }
    case SweepAxis::Epsilon:
      c.epsilon = c.ms_to_ticks(value);
      c.clock_offsets.reset();
      break;
  }
  c.validate();
  return c;
}

std::vector<SweepRow> sweep(const SweepSpec& plan, const ScenarioConfig& base, const MonitorWindowing& windowing,
                            const Predicate& predicate, const EncoderConfig& encoder, const SolverRunner& solver,
                            const RunOptions& options) {
  if (plan.seeds.empty()) throw Error("sweep needs at least one seed");
  std::vector<SweepRow> rows;
  for (double value : plan.values) {
    SweepRow row;
    row.value = value;
    double solver_total = 0.0;
    double encode_total = 0.0;
    for (auto seed : plan.seeds) {
      try {
        ScenarioConfig config = apply_axis(base, plan.axis, value);
        config.seed = seed;
        const auto reports = monitor_run(config, windowing, predicate, encoder, solver, options);
        ++row.runs;
        for (const auto& r : reports) {
          ++row.windows;
          switch (r.verdict) {
            case Verdict::Sat: ++row.sat; break;
            case Verdict::Unsat: ++row.unsat; break;
            case Verdict::Error:
              ++row.errors;
              if (row.failure.empty()) row.failure = r.diagnostics;
              break;
          }
          solver_total += r.solver_seconds;
          encode_total += r.encode_seconds;
          row.max_solver_s = std::max(row.max_solver_s, r.solver_seconds);
        }
      } catch (const std::exception& e) {
        if (row.failure.empty()) row.failure = e.what();
      }
    }
    if (row.windows > 0) {
      row.mean_solver_s = solver_total / static_cast<double>(row.windows);
      row.mean_encode_s = encode_total / static_cast<double>(row.windows);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' || ch == '\r' ? ' ' : ch;
  }
  return out + "\"";
}

}  // namespace

void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows) {
  out << to_string(axis) << ",runs,windows,sat,unsat,error,mean_solver_s,mean_encode_s,max_solver_s,failure\n";
  for (const auto& r : rows)
    out << r.value << ',' << r.runs << ',' << r.windows << ',' << r.sat << ',' << r.unsat << ',' << r.errors << ','
        << r.mean_solver_s << ',' << r.mean_encode_s << ',' << r.max_solver_s << ',' << csv_field(r.failure) << '\n';
}

}  // namespace psmon
