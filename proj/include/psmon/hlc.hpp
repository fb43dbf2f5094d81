#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

namespace psmon {

/// Simulator clock ticks. One tick is 0.01 ms unless configured otherwise.
using Tick = std::int64_t;

/// Hybrid logical clock timestamp <l, c>.
///
/// `l` is the largest physical clock value the process has observed, `c`
/// breaks ties among events sharing the same `l`. Ordering is lexicographic.
struct HlcTimestamp {
  Tick l = 0;
  std::int64_t c = 0;

  friend constexpr auto operator<=>(const HlcTimestamp&, const HlcTimestamp&) = default;

  /// Serialized as "l.c", e.g. "51.0".
  std::string to_string() const;
  static HlcTimestamp parse(std::string_view text);
};

std::ostream& operator<<(std::ostream& os, const HlcTimestamp& ts);

/// Strict lexicographic order on (l, c).
constexpr bool hlc_less(const HlcTimestamp& a, const HlcTimestamp& b) {
  return a.l < b.l || (a.l == b.l && a.c < b.c);
}

/// Timestamp for a local or send event at physical time `pt`.
HlcTimestamp advance_local(const HlcTimestamp& current, Tick pt);

/// Timestamp for the receipt of a message stamped `msg` at physical time `pt`.
HlcTimestamp advance_receive(const HlcTimestamp& current, const HlcTimestamp& msg, Tick pt);

/// Smallest timestamp strictly greater than `ts` at the same l.
constexpr HlcTimestamp successor(const HlcTimestamp& ts) { return {ts.l, ts.c + 1}; }

}  // namespace psmon
