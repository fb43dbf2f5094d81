#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "psmon/encoder.hpp"
#include "psmon/error.hpp"
#include "psmon/monitor.hpp"
#include "psmon/oracle.hpp"
#include "psmon/reporter.hpp"
#include "psmon/simulator.hpp"
#include "psmon/sweep.hpp"

using namespace psmon;

namespace {

const std::vector<std::string> kScenarioKeys = {"workload", "n",     "tick_ms", "epsilon",  "delta", "delta_min",
                                                "delta_max", "mfr",  "duration", "seed",    "beta",  "interval",
                                                "domain",   "slot",  "guard",   "overrun", "overrun_prob"};

struct ScenarioFlags {
  std::string config_file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key=value scenario file; flags override it")->check(CLI::ExistingFile);
    for (const auto& key : kScenarioKeys) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      app->add_option_function<std::string>(flag, [this, key](const std::string& v) { values[key] = v; },
                                            "scenario " + key);
    }
  }

  ScenarioConfig build() const {
    ScenarioConfig c = config_file.empty() ? ScenarioConfig{} : ScenarioConfig::from_file(config_file);
    if (auto it = values.find("workload"); it != values.end()) c.apply(it->first, it->second);
    for (const auto& [k, v] : values)
      if (k != "workload") c.apply(k, v);
    c.validate();
    return c;
  }

  bool has(const std::string& key) const { return values.count(key) > 0; }
};

struct MonitorFlags {
  Tick period = 100000;
  std::optional<Tick> overlap;
  std::string predicate = "conflict";
  bool combine = false;
  std::int64_t c_prime = 0;
  std::string solver = SolverRunner::default_command();
  double timeout_s = 60.0;
  std::string dump_dir;
  Tick link_delay = 0;
  bool serial = false;

  void attach(CLI::App* app) {
    app->add_option("--period", period, "ticks per monitoring window")->capture_default_str();
    app->add_option("--overlap", overlap, "ticks shared by consecutive windows (default epsilon)");
    app->add_option("--predicate", predicate,
                    "conj | exactly:K | atleast:K | sumeq:K | sumgeq:K | conflict | cnf:FILE")
        ->capture_default_str();
    app->add_flag("--combine", combine, "fold <l,c> into nl = c'*l + c");
    app->add_option("--c-prime", c_prime, "fixed c' for --combine (0 = automatic)");
    app->add_option("--solver", solver, "solver command; {file} is replaced by the script path")
        ->capture_default_str();
    app->add_option("--timeout", timeout_s, "solver timeout in seconds")->capture_default_str();
    app->add_option("--dump-smt", dump_dir, "write each window's SMT-LIB2 script into this directory");
    app->add_option("--link-delay", link_delay, "max ticks a report spends in transit to the monitor");
    app->add_flag("--serial", serial, "solve windows one at a time");
  }

  MonitorWindowing windowing() const { return {period, overlap}; }

  EncoderConfig encoder(Tick epsilon) const {
    EncoderConfig e;
    e.epsilon = epsilon;
    e.combine = combine;
    e.c_prime = c_prime;
    return e;
  }

  SolverRunner runner() const {
    return SolverRunner(solver, std::chrono::milliseconds(static_cast<std::int64_t>(timeout_s * 1000.0)));
  }

  RunOptions run_options() const {
    RunOptions o;
    o.link_delay = link_delay;
    o.monitor.parallel = !serial;
    o.monitor.dump_dir = dump_dir;
    if (!dump_dir.empty()) std::filesystem::create_directories(dump_dir);
    return o;
  }
};

Predicate load_predicate(const std::string& text) {
  if (text.rfind("cnf:", 0) == 0) {
    std::ifstream in(text.substr(4));
    if (!in) throw Error("cannot open CNF file " + text.substr(4));
    return Predicate::cnf(parse_dimacs(in).clauses);
  }
  return Predicate::parse(text);
}

std::vector<ReportMessage> load_reports(const std::string& path) {
  if (path == "-") return read_jsonl(std::cin);
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace " + path);
  return read_jsonl(in);
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw Error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    std::istringstream is(item);
    T v;
    if (!(is >> v) || !(is >> std::ws).eof()) throw Error("bad list element '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error("empty list");
  return out;
}

nlohmann::ordered_json snapshot_json(const SnapshotAssignment& s) {
  auto arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < s.entries.size(); ++i)
    arr.push_back({{"proc", i + 1}, {"hlc", s.entries[i].at.to_string()}, {"value", s.entries[i].value}});
  return arr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"psmon: predicate detection over hybrid-logical-clock traces with an SMT solver"};
  app.require_subcommand(1);

  // run
  ScenarioFlags run_scenario;
  std::string run_out;
  auto* run_cmd = app.add_subcommand("run", "simulate a scenario and write its report stream as JSONL");
  run_scenario.attach(run_cmd);
  run_cmd->add_option("--out", run_out, "output file (default stdout)");

  // monitor
  ScenarioFlags mon_scenario;
  MonitorFlags mon_flags;
  std::string mon_trace, mon_out;
  auto* mon_cmd = app.add_subcommand("monitor", "decide each window of a trace, or of a freshly simulated run");
  mon_scenario.attach(mon_cmd);
  mon_flags.attach(mon_cmd);
  mon_cmd->add_option("--trace", mon_trace, "JSONL report stream to monitor, '-' for stdin (default: simulate)");
  mon_cmd->add_option("--out", mon_out, "JSONL window reports (default stdout)");

  // sweep
  ScenarioFlags sw_scenario;
  MonitorFlags sw_flags;
  std::string sw_axis, sw_values, sw_seeds = "1", sw_out;
  auto* sw_cmd = app.add_subcommand("sweep", "vary one parameter and tabulate solver time and verdicts as CSV");
  sw_scenario.attach(sw_cmd);
  sw_flags.attach(sw_cmd);
  sw_cmd->add_option("--axis", sw_axis, "mfr (msgs/s) | delta (ms) | beta | interval (ms) | epsilon (ms)")
      ->required();
  sw_cmd->add_option("--values", sw_values, "comma-separated axis values")->required();
  sw_cmd->add_option("--seeds", sw_seeds, "comma-separated seeds")->capture_default_str();
  sw_cmd->add_option("--out", sw_out, "CSV output (default stdout)");

  // oracle
  std::string or_trace, or_predicate = "conflict", or_method = "parallel";
  Tick or_epsilon = 0;
  OracleLimits limits;
  auto* or_cmd = app.add_subcommand("oracle", "exhaustively search a small trace for a valid snapshot");
  or_cmd->add_option("--trace", or_trace, "JSONL report stream, '-' for stdin")->required();
  or_cmd->add_option("--epsilon", or_epsilon, "clock skew bound in ticks")->required();
  or_cmd->add_option("--predicate", or_predicate, "predicate, as for monitor")->capture_default_str();
  or_cmd->add_option("--method", or_method, "parallel | serial | exhaustive")
      ->check(CLI::IsMember({"parallel", "serial", "exhaustive"}))
      ->capture_default_str();
  or_cmd->add_option("--max-processes", limits.max_processes)->capture_default_str();
  or_cmd->add_option("--max-ticks", limits.max_ticks)->capture_default_str();
  or_cmd->add_option("--max-events", limits.max_events_per_process)->capture_default_str();

  // gen-sat
  std::string gs_cnf, gs_out, gs_smt;
  Tick gs_epsilon = 1000;
  std::uint64_t gs_seed = 1;
  auto* gs_cmd = app.add_subcommand("gen-sat", "turn a DIMACS CNF formula into a trace with a matching predicate");
  gs_cmd->add_option("--cnf", gs_cnf, "DIMACS CNF file")->required()->check(CLI::ExistingFile);
  gs_cmd->add_option("--epsilon", gs_epsilon, "clock skew bound in ticks")->capture_default_str();
  gs_cmd->add_option("--seed", gs_seed)->capture_default_str();
  gs_cmd->add_option("--out", gs_out, "JSONL report stream (default stdout)");
  gs_cmd->add_option("--smt", gs_smt, "also write the SMT-LIB2 script for the whole trace");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const Trace trace = run(run_scenario.build());
      Output out(run_out);
      write_jsonl(out.stream(), reports_from_trace(trace));
    } else if (*mon_cmd) {
      const ScenarioConfig config = mon_scenario.build();
      const Predicate predicate = load_predicate(mon_flags.predicate);
      Trace trace = mon_trace.empty() ? run(config) : trace_from_reports(load_reports(mon_trace), config.epsilon);
      const auto reports = monitor_trace(trace, mon_flags.windowing(), predicate, mon_flags.encoder(config.epsilon),
                                         mon_flags.runner(), mon_flags.run_options(), config.seed);
      Output out(mon_out);
      std::size_t sat = 0, unsat = 0, errors = 0;
      for (const auto& r : reports) {
        out.stream() << r.to_json_line() << '\n';
        sat += r.verdict == Verdict::Sat;
        unsat += r.verdict == Verdict::Unsat;
        errors += r.verdict == Verdict::Error;
      }
      const double simulated_s = static_cast<double>(trace.horizon) * config.tick_ms / 1000.0;
      std::cerr << reports.size() << " windows: " << sat << " sat, " << unsat << " unsat, " << errors << " error\n";
      if (simulated_s > 0) {
        const auto cap = capacity_estimate(reports, simulated_s, trace.n);
        std::cerr << "solver cost c = " << cap.c << " s per simulated s; standalone monitors " << cap.standalone_monitors
                  << ", combined overhead fraction " << cap.combined_fraction << '\n';
      }
      return errors == 0 ? 0 : 2;
    } else if (*sw_cmd) {
      SweepSpec plan;
      plan.axis = parse_sweep_axis(sw_axis);
      plan.values = parse_list<double>(sw_values);
      plan.seeds = parse_list<std::uint64_t>(sw_seeds);
      const ScenarioConfig base = sw_scenario.build();
      const auto rows = sweep(plan, base, sw_flags.windowing(), load_predicate(sw_flags.predicate),
                              sw_flags.encoder(base.epsilon), sw_flags.runner(), sw_flags.run_options());
      Output out(sw_out);
      write_sweep_csv(out.stream(), plan.axis, rows);
    } else if (*or_cmd) {
      const Trace trace = trace_from_reports(load_reports(or_trace), or_epsilon);
      const Predicate predicate = load_predicate(or_predicate);
      std::optional<SnapshotAssignment> found;
      if (or_method == "parallel") found = find_valid_snapshot(trace, predicate, or_epsilon, limits);
      else if (or_method == "serial") found = find_valid_snapshot_serial(trace, predicate, or_epsilon, limits);
      else found = find_valid_snapshot_exhaustive(trace, predicate, or_epsilon, limits);
      nlohmann::ordered_json j;
      j["verdict"] = found ? "sat" : "unsat";
      if (found) j["witness"] = snapshot_json(*found);
      std::cout << j.dump() << '\n';
    } else if (*gs_cmd) {
      std::ifstream in(gs_cnf);
      const SatInstance inst = gen_satisfiability_instance(parse_dimacs(in), gs_epsilon, gs_seed);
      Output out(gs_out);
      write_jsonl(out.stream(), reports_from_trace(inst.trace));
      if (!gs_smt.empty()) {
        EncoderConfig e;
        e.epsilon = gs_epsilon;
        std::ofstream(gs_smt) << encode_trace(inst.trace, inst.predicate, e).render();
      }
      std::cerr << "predicate: cnf:" << gs_cnf << " over " << inst.trace.n << " processes, epsilon " << gs_epsilon
                << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "psmon: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
