#include "psmon/monitor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "psmon/error.hpp"

namespace psmon {

std::string MonitorReport::to_json_line() const {
  nlohmann::ordered_json j;
  j["window"] = window;
  j["from"] = range.from;
  j["to"] = range.to;
  j["verdict"] = to_string(verdict);
  if (witness) {
    auto snap = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < witness->entries.size(); ++i) {
      nlohmann::ordered_json e;
      e["proc"] = i + 1;
      e["hlc"] = witness->entries[i].at.to_string();
      e["value"] = witness->entries[i].value;
      snap.push_back(e);
    }
    j["witness"] = snap;
  }
  j["solver_s"] = solver_seconds;
  j["encode_s"] = encode_seconds;
  j["var_reports"] = var_reports;
  j["msg_reports"] = msg_reports;
  j["verdict_tick"] = verdict_tick;
  if (latency) j["latency"] = *latency;
  if (!diagnostics.empty()) j["diagnostics"] = diagnostics;
  return j.dump();
}

Monitor::Monitor(int n, EncoderConfig encoder, MonitorWindowing windowing, Predicate predicate, SolverRunner solver,
                 MonitorOptions options)
    : n_(n),
      encoder_(encoder),
      windowing_(windowing),
      predicate_(std::move(predicate)),
      solver_(std::move(solver)),
      options_(std::move(options)),
      coverage_(static_cast<std::size_t>(n), HlcTimestamp{0, 0}) {
  if (n < 1) throw Error("monitor needs at least one process");
  if (windowing_.period <= 0) throw Error("monitor period must be positive");
  if (windowing_.overlap_or(encoder_.epsilon) < encoder_.epsilon)
    throw Error("window overlap must be at least epsilon");
}

Window Monitor::nominal(std::size_t k) const {
  const auto idx = static_cast<Tick>(k);
  return {idx * windowing_.period, (idx + 1) * windowing_.period + windowing_.overlap_or(encoder_.epsilon)};
}

void Monitor::ingest(const ReportMessage& report, Tick arrival) {
  if (done_) throw Error("report arrived after the stream was finished");
  auto check_proc = [this](ProcessId p) {
    if (p < 1 || p > n_) throw Error("report names process " + std::to_string(p) + " outside 1.." + std::to_string(n_));
  };
  if (const auto* v = std::get_if<VarReport>(&report)) {
    check_proc(v->proc);
    auto& cov = coverage_[static_cast<std::size_t>(v->proc - 1)];
    if (v->from != cov)
      throw Error("channel P" + std::to_string(v->proc) + " expected an interval starting at " + cov.to_string() +
                  ", got " + v->from.to_string());
    cov = v->to;
    vars_.push_back(*v);
  } else {
    const auto& m = std::get<MsgReport>(report);
    check_proc(m.sender);
    check_proc(m.receiver);
    msgs_.push_back(m);
  }
  last_arrival_ = std::max(last_arrival_, arrival);
  release_ready(arrival);
}

void Monitor::release_ready(Tick arrival) {
  const HlcTimestamp reported = *std::min_element(coverage_.begin(), coverage_.end());
  for (;;) {
    const Window w = nominal(next_window_);
    if (reported < HlcTimestamp{w.to, 0}) break;
    ready_.push_back({next_window_++, w, arrival});
  }
}

std::vector<MonitorReport> Monitor::poll() {
  std::vector<Pending> batch;
  batch.swap(ready_);
  return solve(batch);
}

std::vector<MonitorReport> Monitor::finish() {
  if (done_) return {};
  done_ = true;
  const HlcTimestamp end = *std::max_element(coverage_.begin(), coverage_.end());
  for (int p = 1; p <= n_; ++p)
    if (coverage_[static_cast<std::size_t>(p - 1)] != end)
      throw Error("P" + std::to_string(p) + " reported only up to " + coverage_[static_cast<std::size_t>(p - 1)].to_string() +
                  ", others up to " + end.to_string());
  const Tick horizon = end.c == 0 ? end.l : end.l + 1;
  for (std::size_t k = next_window_;; ++k) {
    Window w = nominal(k);
    if (w.from >= horizon) break;
    if (k > 0 && nominal(k - 1).to >= horizon) break;  // already inside window k - 1
    w.to = std::min(w.to, horizon);
    ready_.push_back({k, w, last_arrival_});
  }
  next_window_ = ready_.empty() ? next_window_ : ready_.back().index + 1;
  return poll();
}

ConstraintScript Monitor::script_for(const Window& window) const {
  const HlcTimestamp lo{window.from, 0};
  const HlcTimestamp hi{window.to, 0};
  std::vector<VarReport> vars;
  for (const auto& v : vars_)
    if (lo < v.to && v.from < hi) vars.push_back({v.proc, v.old_value, std::max(v.from, lo), std::min(v.to, hi)});
  std::vector<MsgReport> msgs;
  for (const auto& m : msgs_)
    if (!(m.send < lo) && m.recv < hi) msgs.push_back(m);
  return encode_window(n_, vars, msgs, predicate_, window, encoder_);
}

MonitorReport Monitor::solve_one(const Pending& w) const {
  MonitorReport rep;
  rep.window = w.index;
  rep.range = w.range;
  rep.verdict_tick = w.verdict_tick;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const ConstraintScript script = script_for(w.range);
    const std::string text = script.render();
    rep.encode_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.var_reports = script.var_events.size();
    rep.msg_reports = script.communication.size();
    if (!options_.dump_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "window-%06zu.smt2", w.index);
      std::ofstream(std::filesystem::path(options_.dump_dir) / name) << text;
    }
    const SolverResult result = check(script, solver_);
    rep.verdict = result.verdict;
    rep.solver_seconds = result.wall_seconds;
    rep.diagnostics = result.diagnostics;
    rep.witness = result.model;
    if (rep.witness) {
      Tick latest = 0;
      for (const auto& e : rep.witness->entries) latest = std::max(latest, e.at.l);
      rep.latency = std::max<Tick>(0, w.verdict_tick - latest);
    }
  } catch (const std::exception& e) {
    rep.verdict = Verdict::Error;
    rep.diagnostics = e.what();
  }
  return rep;
}

std::vector<MonitorReport> Monitor::solve(const std::vector<Pending>& batch) const {
  std::vector<MonitorReport> out(batch.size());
  const auto count = static_cast<std::int64_t>(batch.size());
  if (options_.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = solve_one(batch[static_cast<std::size_t>(i)]);
  } else {
    for (std::int64_t i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = solve_one(batch[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<MonitorReport> monitor_trace(const Trace& trace, const MonitorWindowing& windowing,
                                         const Predicate& predicate, EncoderConfig encoder, const SolverRunner& solver,
                                         const RunOptions& options, std::uint64_t seed) {
  encoder.epsilon = trace.epsilon;
  Monitor monitor(trace.n, encoder, windowing, predicate, solver, options.monitor);
  // Solving is deferred to finish() so all windows are decided in one batch.
  for (const auto& d : deliver(reports_from_trace(trace), options.link_delay, seed ^ 0x9e3779b97f4a7c15ULL))
    monitor.ingest(d.report, d.arrival);
  auto reports = monitor.finish();
  std::sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) { return a.window < b.window; });
  return reports;
}

std::vector<MonitorReport> monitor_run(const ScenarioConfig& config, const MonitorWindowing& windowing,
                                       const Predicate& predicate, EncoderConfig encoder, const SolverRunner& solver,
                                       const RunOptions& options) {
  return monitor_trace(run(config), windowing, predicate, encoder, solver, options, config.seed);
}

CapacityEstimate capacity_from_cost(double c, int n) {
  CapacityEstimate est;
  est.c = c;
  est.standalone_monitors = std::max(1, static_cast<int>(std::ceil(c)));
  est.combined_fraction = c / (static_cast<double>(n) + c);
  return est;
}

CapacityEstimate capacity_estimate(const std::vector<MonitorReport>& reports, double simulated_seconds, int n) {
  if (!(simulated_seconds > 0.0)) throw Error("simulated duration must be positive");
  double total = 0.0;
  for (const auto& r : reports) total += r.solver_seconds;
  return capacity_from_cost(total / simulated_seconds, n);
}

}  // namespace psmon
