#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "psmon/reporter.hpp"
#include "psmon/trace.hpp"

namespace psmon {

struct EncoderConfig {
  Tick epsilon = 1000;
  /// Fold each <l_i, c_i> pair into nl_i = c' * l_i + c_i.
  bool combine = false;
  /// Multiplier c'. Zero picks max(4, c_max + 2) per window.
  std::int64_t c_prime = 0;
};

/// c' for a window whose largest reported counter is `c_max`. Throws
/// EncodingError when a fixed c' does not exceed c_max.
std::int64_t choose_c_prime(const EncoderConfig& config, std::int64_t c_max);

/// Snapshot times considered by one script: l in [from, to).
struct Window {
  Tick from = 0;
  Tick to = 0;
};

/// The assertions for one monitoring window, grouped by family. Rendering
/// is deterministic: identical inputs give byte-identical SMT-LIB2.
struct ConstraintScript {
  int n = 0;
  bool combined = false;
  std::int64_t c_prime = 1;
  Window window;
  std::vector<std::string> declarations;
  std::vector<std::string> bounds;
  std::vector<std::string> clock_sync;
  std::vector<std::string> communication;
  std::vector<std::string> var_events;
  std::string predicate;

  std::string render() const;
};

// Per-family encoders. `c_prime` must already be resolved; with
// `config.combine` off it is unused.
std::vector<std::string> encode_clock_sync(int n, const EncoderConfig& config, std::int64_t c_prime);
std::string encode_communication(const MsgReport& msg, const EncoderConfig& config, std::int64_t c_prime);
std::string encode_var_event(const VarReport& rep, const EncoderConfig& config, std::int64_t c_prime);
std::string encode_predicate(const Predicate& p, int n);

/// Builds the complete script for one window. Reports are taken as given;
/// callers clip them to the window (see Monitor).
ConstraintScript encode_window(int n, std::span<const VarReport> vars, std::span<const MsgReport> msgs,
                               const Predicate& predicate, const Window& window, const EncoderConfig& config);

/// Convenience: the single-window script covering a whole trace.
ConstraintScript encode_trace(const Trace& trace, const Predicate& predicate, const EncoderConfig& config);

}  // namespace psmon
