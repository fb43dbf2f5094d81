#include "psmon/hlc.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include "psmon/error.hpp"

namespace psmon {

namespace {

std::int64_t bump(std::int64_t c) {
  if (c == std::numeric_limits<std::int64_t>::max()) throw Error("HLC counter overflow");
  return c + 1;
}

std::int64_t parse_int(std::string_view text, std::string_view whole) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw Error("malformed HLC timestamp '" + std::string(whole) + "'");
  return value;
}

}  // namespace

std::string HlcTimestamp::to_string() const { return std::to_string(l) + "." + std::to_string(c); }

HlcTimestamp HlcTimestamp::parse(std::string_view text) {
  auto dot = text.find('.');
  if (dot == std::string_view::npos) throw Error("malformed HLC timestamp '" + std::string(text) + "'");
  HlcTimestamp ts{parse_int(text.substr(0, dot), text), parse_int(text.substr(dot + 1), text)};
  if (ts.l < 0 || ts.c < 0) throw Error("negative HLC component in '" + std::string(text) + "'");
  return ts;
}

std::ostream& operator<<(std::ostream& os, const HlcTimestamp& ts) {
  return os << '<' << ts.l << ',' << ts.c << '>';
}

HlcTimestamp advance_local(const HlcTimestamp& current, Tick pt) {
  HlcTimestamp next;
  next.l = std::max(current.l, pt);
  next.c = next.l == current.l ? bump(current.c) : 0;
  return next;
}

HlcTimestamp advance_receive(const HlcTimestamp& current, const HlcTimestamp& msg, Tick pt) {
  HlcTimestamp next;
  next.l = std::max({current.l, msg.l, pt});
  if (next.l == current.l && next.l == msg.l)
    next.c = bump(std::max(current.c, msg.c));
  else if (next.l == current.l)
    next.c = bump(current.c);
  else if (next.l == msg.l)
    next.c = bump(msg.c);
  else
    next.c = 0;
  return next;
}

}  // namespace psmon
