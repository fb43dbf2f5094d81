#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "psmon/simulator.hpp"
#include "psmon/trace.hpp"

namespace psmon {

/// Process `proc` held `old_value` throughout [from, to).
struct VarReport {
  ProcessId proc = 0;
  int old_value = 0;
  HlcTimestamp from;
  HlcTimestamp to;
  friend bool operator==(const VarReport&, const VarReport&) = default;
};

/// Filed by the receiver; carries both endpoints of one message.
struct MsgReport {
  ProcessId sender = 0;
  HlcTimestamp send;
  ProcessId receiver = 0;
  HlcTimestamp recv;
  friend bool operator==(const MsgReport&, const MsgReport&) = default;
};

using ReportMessage = std::variant<VarReport, MsgReport>;

VarReport report_var_change(ProcessId proc, int old_value, const HlcTimestamp& prev, const HlcTimestamp& next);
MsgReport report_message(ProcessId sender, const HlcTimestamp& send, ProcessId receiver, const HlcTimestamp& recv);

/// Closing reports for the value each process holds at the horizon,
/// covering [last change before the horizon, horizon).
std::vector<VarReport> finalize_open_intervals(const Trace& trace, const HlcTimestamp& horizon);

/// Which channel a report travels on and when it is emitted.
ProcessId channel_of(const ReportMessage& r);
HlcTimestamp emitted_at(const ReportMessage& r);

/// Every report a trace produces, including the closing intervals at the
/// trace horizon, ordered by emission time then process.
std::vector<ReportMessage> reports_from_trace(const Trace& trace);

/// A report together with the tick at which it reaches the monitor.
struct Delivery {
  Tick arrival = 0;
  ReportMessage report;
};

/// Delivers each report after a uniform delay in [0, link_delay] ticks while
/// keeping every per-process channel FIFO. The result is in arrival order.
std::vector<Delivery> deliver(const std::vector<ReportMessage>& reports, Tick link_delay, std::uint64_t seed);

/// Rebuilds a trace from its reports. Physical clocks are unknown to the
/// monitor, so each event's pt is its HLC l value.
Trace trace_from_reports(const std::vector<ReportMessage>& reports, Tick epsilon, std::optional<int> n = std::nullopt);

// JSON Lines persistence:
//   {"type":"var","proc":i,"old":x,"interval":["l.c","l.c"]}
//   {"type":"msg","from":i,"sent":"l.c","to":j,"recv":"l.c"}
std::string to_json_line(const ReportMessage& r);
ReportMessage parse_json_line(const std::string& line);
void write_jsonl(std::ostream& out, const std::vector<ReportMessage>& reports);
std::vector<ReportMessage> read_jsonl(std::istream& in);

}  // namespace psmon
