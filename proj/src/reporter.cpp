#include "psmon/reporter.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>

#include "json.hpp"

#include "psmon/error.hpp"

namespace psmon {

using Json = nlohmann::ordered_json;

VarReport report_var_change(ProcessId proc, int old_value, const HlcTimestamp& prev, const HlcTimestamp& next) {
  if (!hlc_less(prev, next))
    throw Error("variable report for P" + std::to_string(proc) + " has empty interval [" + prev.to_string() + ", " +
                next.to_string() + ")");
  return {proc, old_value, prev, next};
}

MsgReport report_message(ProcessId sender, const HlcTimestamp& send, ProcessId receiver, const HlcTimestamp& recv) {
  if (!hlc_less(send, recv))
    throw Error("message P" + std::to_string(sender) + "->P" + std::to_string(receiver) + " received at " +
                recv.to_string() + " before it was sent at " + send.to_string());
  return {sender, send, receiver, recv};
}

std::vector<VarReport> finalize_open_intervals(const Trace& trace, const HlcTimestamp& horizon) {
  std::vector<VarReport> out;
  for (int p = 1; p <= trace.n; ++p) {
    HlcTimestamp last{0, 0};
    int value = trace.initial.at(static_cast<std::size_t>(p - 1));
    for (const auto& e : trace.of(p)) {
      if (e.kind != EventKind::VarChange) continue;
      if (!hlc_less(e.hlc, horizon)) break;
      last = e.hlc;
      value = e.new_value;
    }
    if (hlc_less(last, horizon)) out.push_back({p, value, last, horizon});
  }
  return out;
}

ProcessId channel_of(const ReportMessage& r) {
  return std::visit([](const auto& x) {
    if constexpr (std::is_same_v<std::decay_t<decltype(x)>, VarReport>) return x.proc;
    else return x.receiver;
  }, r);
}

HlcTimestamp emitted_at(const ReportMessage& r) {
  return std::visit([](const auto& x) {
    if constexpr (std::is_same_v<std::decay_t<decltype(x)>, VarReport>) return x.to;
    else return x.recv;
  }, r);
}

std::vector<ReportMessage> reports_from_trace(const Trace& trace) {
  std::vector<ReportMessage> out;
  for (int p = 1; p <= trace.n; ++p) {
    HlcTimestamp prev{0, 0};
    for (const auto& e : trace.of(p)) {
      if (e.kind == EventKind::VarChange) {
        if (prev != e.hlc) out.emplace_back(report_var_change(p, e.old_value, prev, e.hlc));
        prev = e.hlc;
      }
    }
  }
  for (const auto& m : trace.messages) out.emplace_back(report_message(m.sender, m.send, m.receiver, m.recv));
  for (const auto& r : finalize_open_intervals(trace, {trace.horizon, 0})) out.emplace_back(r);
  std::stable_sort(out.begin(), out.end(), [](const ReportMessage& a, const ReportMessage& b) {
    auto ka = std::make_pair(emitted_at(a), channel_of(a));
    auto kb = std::make_pair(emitted_at(b), channel_of(b));
    return ka < kb;
  });
  return out;
}

std::vector<Delivery> deliver(const std::vector<ReportMessage>& reports, Tick link_delay, std::uint64_t seed) {
  Rng rng(seed);
  std::map<ProcessId, Tick> channel_clock;
  std::vector<std::pair<std::size_t, Delivery>> staged;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    Tick& last = channel_clock[channel_of(reports[i])];
    Tick arrival = emitted_at(reports[i]).l + (link_delay > 0 ? rng.range(0, link_delay) : 0);
    last = std::max(last, arrival);
    staged.push_back({i, {last, reports[i]}});
  }
  std::stable_sort(staged.begin(), staged.end(), [](const auto& a, const auto& b) {
    return a.second.arrival < b.second.arrival;
  });
  std::vector<Delivery> out;
  out.reserve(staged.size());
  for (auto& s : staged) out.push_back(std::move(s.second));
  return out;
}

Trace trace_from_reports(const std::vector<ReportMessage>& reports, Tick epsilon, std::optional<int> n) {
  int procs = n.value_or(0);
  Tick horizon = 0;
  std::map<ProcessId, std::vector<VarReport>> vars;
  std::vector<MsgReport> msgs;
  for (const auto& r : reports) {
    if (const auto* v = std::get_if<VarReport>(&r)) {
      vars[v->proc].push_back(*v);
      horizon = std::max(horizon, v->to.c == 0 ? v->to.l : v->to.l + 1);
      if (!n) procs = std::max(procs, v->proc);
    } else {
      const auto& m = std::get<MsgReport>(r);
      msgs.push_back(m);
      horizon = std::max(horizon, m.recv.l + 1);
      if (!n) procs = std::max({procs, m.sender, m.receiver});
    }
  }
  Trace trace;
  trace.n = procs;
  trace.epsilon = epsilon;
  trace.horizon = horizon;
  trace.initial.assign(static_cast<std::size_t>(procs), 0);
  trace.events.resize(static_cast<std::size_t>(procs));

  auto check_proc = [procs](ProcessId p) {
    if (p < 1 || p > procs) throw Error("report names process " + std::to_string(p) + " outside 1.." + std::to_string(procs));
  };
  for (auto& [p, list] : vars) {
    check_proc(p);
    std::sort(list.begin(), list.end(), [](const VarReport& a, const VarReport& b) { return a.from < b.from; });
    if (list.front().from != HlcTimestamp{0, 0}) throw Error("reports for P" + std::to_string(p) + " do not start at 0.0");
    trace.initial[static_cast<std::size_t>(p - 1)] = list.front().old_value;
    for (std::size_t i = 0; i + 1 < list.size(); ++i) {
      if (list[i].to != list[i + 1].from) throw Error("reports for P" + std::to_string(p) + " leave a gap or overlap");
      trace.events[static_cast<std::size_t>(p - 1)].push_back(
          {p, EventKind::VarChange, list[i].to.l, list[i].to, list[i].old_value, list[i + 1].old_value, -1});
    }
  }
  std::int64_t id = 0;
  for (const auto& m : msgs) {
    check_proc(m.sender);
    check_proc(m.receiver);
    trace.events[static_cast<std::size_t>(m.sender - 1)].push_back({m.sender, EventKind::Send, m.send.l, m.send, 0, 0, id});
    trace.events[static_cast<std::size_t>(m.receiver - 1)].push_back(
        {m.receiver, EventKind::Receive, m.recv.l, m.recv, 0, 0, id});
    trace.messages.push_back({id, m.sender, m.send, m.receiver, m.recv});
    ++id;
  }
  for (auto& list : trace.events)
    std::stable_sort(list.begin(), list.end(), [](const Event& a, const Event& b) { return a.hlc < b.hlc; });
  return trace;
}

std::string to_json_line(const ReportMessage& r) {
  Json j;
  if (const auto* v = std::get_if<VarReport>(&r)) {
    j["type"] = "var";
    j["proc"] = v->proc;
    j["old"] = v->old_value;
    j["interval"] = Json::array({v->from.to_string(), v->to.to_string()});
  } else {
    const auto& m = std::get<MsgReport>(r);
    j["type"] = "msg";
    j["from"] = m.sender;
    j["sent"] = m.send.to_string();
    j["to"] = m.receiver;
    j["recv"] = m.recv.to_string();
  }
  return j.dump();
}

ReportMessage parse_json_line(const std::string& line) {
  Json j;
  try {
    j = Json::parse(line);
    const auto type = j.at("type").get<std::string>();
    if (type == "var") {
      const auto& old = j.at("old");
      int value = old.is_boolean() ? (old.get<bool>() ? 1 : 0) : old.get<int>();
      const auto& iv = j.at("interval");
      if (!iv.is_array() || iv.size() != 2) throw Error("interval must hold two timestamps");
      return report_var_change(j.at("proc").get<int>(), value, HlcTimestamp::parse(iv[0].get<std::string>()),
                               HlcTimestamp::parse(iv[1].get<std::string>()));
    }
    if (type == "msg")
      return report_message(j.at("from").get<int>(), HlcTimestamp::parse(j.at("sent").get<std::string>()),
                            j.at("to").get<int>(), HlcTimestamp::parse(j.at("recv").get<std::string>()));
    throw Error("unknown record type '" + type + "'");
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed report record: ") + e.what());
  }
}

void write_jsonl(std::ostream& out, const std::vector<ReportMessage>& reports) {
  for (const auto& r : reports) out << to_json_line(r) << '\n';
}

std::vector<ReportMessage> read_jsonl(std::istream& in) {
  std::vector<ReportMessage> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_json_line(line));
    } catch (const Error& e) {
      throw Error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace psmon
