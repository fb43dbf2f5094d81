#include "psmon/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

#include "psmon/error.hpp"

namespace psmon {

namespace {

std::int64_t to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(value, &used);
    if (used != value.size()) throw Error("");
    return v;
  } catch (const std::exception&) {
    throw Error("config key '" + key + "' expects an integer, got '" + value + "'");
  }
}

double to_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw Error("");
    return v;
  } catch (const std::exception&) {
    throw Error("config key '" + key + "' expects a number, got '" + value + "'");
  }
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Pending {
  std::int64_t id;
  ProcessId sender;
  HlcTimestamp send;
};

struct ProcessState {
  Tick offset = 0;
  HlcTimestamp hlc;
  int value = 0;
  Tick hold_until = 0;
  Tick next_start = 0;  // exclusive access, local clock
  Tick access_end = 0;
};

}  // namespace

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error("invalid scenario: " + why); };
  auto prob = [&](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) fail(std::string(name) + " must lie in [0, 1]");
  };
  if (n < 1) fail("n must be positive");
  if (!(tick_ms > 0.0)) fail("tick_ms must be positive");
  if (epsilon <= 0) fail("epsilon must be positive");
  if (delta <= 0) fail("delta must be positive");
  if (delta_min.has_value() != delta_max.has_value()) fail("delta_min and delta_max go together");
  if (delta_min && (*delta_min <= 0 || *delta_max < *delta_min)) fail("need 0 < delta_min <= delta_max");
  if (duration <= 0) fail("duration must be positive");
  prob(mfr, "mfr");
  if (const auto* s = std::get_if<SyntheticWorkload>(&workload)) {
    prob(s->beta, "beta");
    if (s->interval <= 0) fail("interval must be positive");
  } else {
    const auto& x = std::get<ExclusiveAccessWorkload>(workload);
    prob(x.overrun_prob, "overrun_prob");
    if (x.slot <= 0) fail("slot must be positive");
    if (x.guard < 0 || x.guard >= x.slot) fail("guard must lie in [0, slot)");
    if (x.overrun < 0) fail("overrun must be non-negative");
  }
  if (clock_offsets) {
    if (static_cast<int>(clock_offsets->size()) != n) fail("clock_offsets needs one entry per process");
    for (Tick off : *clock_offsets)
      if (off < 0 || off > epsilon) fail("clock offsets must lie in [0, epsilon]");
  }
}

Tick ScenarioConfig::ms_to_ticks(double ms) const { return static_cast<Tick>(std::llround(ms / tick_ms)); }

void ScenarioConfig::apply(const std::string& key, const std::string& value) {
  auto synthetic = [&]() -> SyntheticWorkload& {
    if (auto* s = std::get_if<SyntheticWorkload>(&workload)) return *s;
    throw Error("config key '" + key + "' applies to the synthetic workload only");
  };
  auto exclusive = [&]() -> ExclusiveAccessWorkload& {
    if (auto* x = std::get_if<ExclusiveAccessWorkload>(&workload)) return *x;
    throw Error("config key '" + key + "' applies to the exclusive workload only");
  };

  if (key == "n") n = static_cast<int>(to_int(key, value));
  else if (key == "tick_ms") tick_ms = to_real(key, value);
  else if (key == "epsilon") epsilon = to_int(key, value);
  else if (key == "delta") delta = to_int(key, value);
  else if (key == "delta_min") delta_min = to_int(key, value);
  else if (key == "delta_max") delta_max = to_int(key, value);
  else if (key == "mfr") mfr = to_real(key, value);
  else if (key == "duration") duration = to_int(key, value);
  else if (key == "seed") seed = static_cast<std::uint64_t>(to_int(key, value));
  else if (key == "workload") {
    if (value == "synthetic") {
      if (!std::holds_alternative<SyntheticWorkload>(workload)) workload = SyntheticWorkload{};
    } else if (value == "exclusive") {
      if (!std::holds_alternative<ExclusiveAccessWorkload>(workload)) workload = ExclusiveAccessWorkload{};
    } else {
      throw Error("workload must be 'synthetic' or 'exclusive'");
    }
  }
  else if (key == "beta") synthetic().beta = to_real(key, value);
  else if (key == "interval") synthetic().interval = to_int(key, value);
  else if (key == "domain") {
    if (value == "bool") synthetic().domain = ValueDomain::Boolean;
    else if (value == "int") synthetic().domain = ValueDomain::Integer;
    else throw Error("domain must be 'bool' or 'int'");
  }
  else if (key == "slot") exclusive().slot = to_int(key, value);
  else if (key == "guard") exclusive().guard = to_int(key, value);
  else if (key == "overrun") exclusive().overrun = to_int(key, value);
  else if (key == "overrun_prob") exclusive().overrun_prob = to_real(key, value);
  else throw Error("unknown config key '" + key + "'");
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(path + ":" + std::to_string(lineno) + ": expected key=value");
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  // The workload kind decides which other keys are legal.
  std::stable_partition(entries.begin(), entries.end(), [](const auto& kv) { return kv.first == "workload"; });
  ScenarioConfig config;
  for (const auto& [k, v] : entries) config.apply(k, v);
  return config;
}

Tick inject_exclusive_access_fault(const ExclusiveAccessWorkload& workload, Rng& rng) {
  return rng.bernoulli(workload.overrun_prob) ? workload.overrun : 0;
}

Trace run(const ScenarioConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const int n = config.n;

  std::vector<ProcessState> procs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& st = procs[static_cast<std::size_t>(i)];
    st.offset = config.clock_offsets ? (*config.clock_offsets)[static_cast<std::size_t>(i)] : rng.range(0, config.epsilon);
    if (const auto* x = std::get_if<ExclusiveAccessWorkload>(&config.workload)) st.next_start = i * x->slot;
  }
  const Tick max_offset = std::max_element(procs.begin(), procs.end(), [](auto& a, auto& b) {
                            return a.offset < b.offset;
                          })->offset;

  Trace trace;
  trace.n = n;
  trace.epsilon = config.epsilon;
  trace.horizon = config.duration + max_offset;
  trace.initial.assign(static_cast<std::size_t>(n), 0);
  trace.events.resize(static_cast<std::size_t>(n));

  // (delivery tick, receiver, sequence) -> message in flight
  std::map<std::tuple<Tick, ProcessId, std::int64_t>, Pending> in_flight;
  std::map<std::int64_t, std::size_t> message_slot;
  std::int64_t next_id = 0;

  for (Tick t = 0; t < config.duration; ++t) {
    for (int i = 0; i < n; ++i) {
      const ProcessId p = i + 1;
      auto& st = procs[static_cast<std::size_t>(i)];
      auto& events = trace.events[static_cast<std::size_t>(i)];
      const Tick pt = t + st.offset;

      auto lo = in_flight.lower_bound({t, p, 0});
      while (lo != in_flight.end() && std::get<0>(lo->first) == t && std::get<1>(lo->first) == p) {
        const Pending& m = lo->second;
        st.hlc = advance_receive(st.hlc, m.send, pt);
        events.push_back({p, EventKind::Receive, pt, st.hlc, 0, 0, m.id});
        trace.messages[message_slot.at(m.id)].recv = st.hlc;
        lo = in_flight.erase(lo);
      }

      auto change = [&](int next) {
        st.hlc = advance_local(st.hlc, pt);
        events.push_back({p, EventKind::VarChange, pt, st.hlc, st.value, next, -1});
        st.value = next;
      };
      if (const auto* s = std::get_if<SyntheticWorkload>(&config.workload)) {
        if (t >= st.hold_until && rng.bernoulli(s->beta)) {
          change(1 - st.value);
          st.hold_until = t + s->interval;
        }
      } else {
        const auto& x = std::get<ExclusiveAccessWorkload>(config.workload);
        if (st.value == 0 && pt >= st.next_start) {
          st.access_end = st.next_start + x.slot - x.guard + inject_exclusive_access_fault(x, rng);
          change(1);
        } else if (st.value == 1 && pt >= st.access_end) {
          change(0);
          st.next_start += static_cast<Tick>(n) * x.slot;
        }
      }

      if (n > 1 && rng.bernoulli(config.mfr)) {
        const Tick delay = config.delta_min ? rng.range(*config.delta_min, *config.delta_max) : config.delta;
        auto dest = static_cast<ProcessId>(rng.range(1, n - 1));
        if (dest >= p) ++dest;
        // Messages that would land past the end of the run are never sent.
        if (t + delay < config.duration) {
          st.hlc = advance_local(st.hlc, pt);
          const std::int64_t id = next_id++;
          events.push_back({p, EventKind::Send, pt, st.hlc, 0, 0, id});
          message_slot[id] = trace.messages.size();
          trace.messages.push_back({id, p, st.hlc, dest, {}});
          in_flight.emplace(std::make_tuple(t + delay, dest, id), Pending{id, p, st.hlc});
        }
      }
    }
  }
  return trace;
}

}  // namespace psmon
