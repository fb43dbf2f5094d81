#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "psmon/trace.hpp"

namespace psmon {

/// Each variable flips with probability `beta` per tick once eligible, then
/// holds its value for at least `interval` ticks.
struct SyntheticWorkload {
  double beta = 0.01;
  Tick interval = 10;
  ValueDomain domain = ValueDomain::Boolean;
};

/// Round-robin time-division access to a shared resource. The owner of a
/// slot accesses from the slot start until `guard` ticks before the slot
/// ends; with probability `overrun_prob` it holds on `overrun` ticks longer.
struct ExclusiveAccessWorkload {
  Tick slot = 10000;
  Tick guard = 1000;
  Tick overrun = 100;
  double overrun_prob = 0.1;
};

using Workload = std::variant<SyntheticWorkload, ExclusiveAccessWorkload>;

struct ScenarioConfig {
  int n = 10;
  double tick_ms = 0.01;
  Tick epsilon = 1000;
  Tick delta = 100;
  // When both are set, delays are drawn uniformly from [delta_min, delta_max].
  std::optional<Tick> delta_min;
  std::optional<Tick> delta_max;
  double mfr = 0.01;  // per-tick send probability per process
  Tick duration = 100000;
  std::uint64_t seed = 1;
  Workload workload = SyntheticWorkload{};
  // Fixed clock offsets in [0, epsilon]; drawn from the seed when absent.
  std::optional<std::vector<Tick>> clock_offsets;

  void validate() const;
  Tick max_delay() const { return delta_min && delta_max ? *delta_max : delta; }
  Tick ms_to_ticks(double ms) const;

  /// Applies `key=value` settings (see README for the key list). Unknown
  /// keys are an error.
  void apply(const std::string& key, const std::string& value);
  static ScenarioConfig from_file(const std::string& path);
};

/// Seeded generator shared by the simulator and the instance generators.
/// Draws are defined here rather than through <random> distributions so
/// traces are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return p >= 1.0 || uniform() < p; }
  /// Uniform integer in [lo, hi].
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

/// Extra access time for one slot: `overrun` with probability
/// `overrun_prob`, otherwise zero.
Tick inject_exclusive_access_fault(const ExclusiveAccessWorkload& workload, Rng& rng);

/// Runs the scenario tick by tick and returns the recorded trace. Each
/// process i has a fixed clock offset, so its physical clock reads
/// t + offset_i at simulation tick t. Within a tick a process first handles
/// arriving messages, then its variable, then possibly sends.
Trace run(const ScenarioConfig& config);

}  // namespace psmon
