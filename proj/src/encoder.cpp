#include "psmon/encoder.hpp"

#include <algorithm>
#include <sstream>

#include "psmon/error.hpp"

namespace psmon {

namespace {

std::string lit(std::int64_t v) { return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v); }

std::string name(const char* base, int i) { return std::string(base) + "_" + std::to_string(i); }

/// Lexicographic comparisons of process i's frontier <l_i, c_i> against a
/// constant timestamp, or the nl_i forms when combined.
class Frontier {
 public:
  Frontier(int i, bool combined, std::int64_t c_prime) : i_(i), combined_(combined), c_prime_(c_prime) {}

  std::string ge(const HlcTimestamp& t) const {
    if (combined_) return "(>= " + name("nl", i_) + " " + lit(fold(t)) + ")";
    return "(or (> " + l() + " " + lit(t.l) + ") (and (= " + l() + " " + lit(t.l) + ") (>= " + c() + " " + lit(t.c) + ")))";
  }
  std::string gt(const HlcTimestamp& t) const {
    if (combined_) return "(> " + name("nl", i_) + " " + lit(fold(t)) + ")";
    return "(or (> " + l() + " " + lit(t.l) + ") (and (= " + l() + " " + lit(t.l) + ") (> " + c() + " " + lit(t.c) + ")))";
  }
  std::string lt(const HlcTimestamp& t) const {
    if (combined_) return "(< " + name("nl", i_) + " " + lit(fold(t)) + ")";
    return "(or (< " + l() + " " + lit(t.l) + ") (and (= " + l() + " " + lit(t.l) + ") (< " + c() + " " + lit(t.c) + ")))";
  }

 private:
  std::string l() const { return name("l", i_); }
  std::string c() const { return name("c", i_); }
  std::int64_t fold(const HlcTimestamp& t) const {
    if (t.c >= c_prime_)
      throw EncodingError("counter " + std::to_string(t.c) + " in " + t.to_string() + " does not fit c' = " +
                          std::to_string(c_prime_));
    return c_prime_ * t.l + t.c;
  }

  int i_;
  bool combined_;
  std::int64_t c_prime_;
};

std::string join(const std::string& op, const std::vector<std::string>& terms, const std::string& empty) {
  if (terms.empty()) return empty;
  if (terms.size() == 1) return terms.front();
  std::string out = "(" + op;
  for (const auto& t : terms) out += " " + t;
  return out + ")";
}

std::string is_one(int i) { return "(= " + name("v", i) + " 1)"; }

}  // namespace

std::int64_t choose_c_prime(const EncoderConfig& config, std::int64_t c_max) {
  if (config.c_prime > 0) {
    if (c_max >= config.c_prime)
      throw EncodingError("observed counter " + std::to_string(c_max) + " does not fit c' = " +
                          std::to_string(config.c_prime));
    return config.c_prime;
  }
  if (config.c_prime < 0) throw EncodingError("c' must be positive");
  // c_max + 2 leaves room for <l, c_max + 1>, the first instant after a send
  // stamped <l, c_max>.
  return std::max<std::int64_t>(4, c_max + 2);
}

std::vector<std::string> encode_clock_sync(int n, const EncoderConfig& config, std::int64_t c_prime) {
  std::vector<std::string> out;
  const std::string base = config.combine ? "nl" : "l";
  const std::int64_t bound = config.combine ? c_prime * config.epsilon : config.epsilon;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      const auto a = name(base.c_str(), i);
      const auto b = name(base.c_str(), j);
      out.push_back("(and (<= (- " + a + " " + b + ") " + lit(bound) + ") (<= (- " + b + " " + a + ") " + lit(bound) + "))");
    }
  return out;
}

std::string encode_communication(const MsgReport& msg, const EncoderConfig& config, std::int64_t c_prime) {
  Frontier receiver(msg.receiver, config.combine, c_prime);
  Frontier sender(msg.sender, config.combine, c_prime);
  return "(=> " + receiver.ge(msg.recv) + " " + sender.gt(msg.send) + ")";
}

std::string encode_var_event(const VarReport& rep, const EncoderConfig& config, std::int64_t c_prime) {
  Frontier f(rep.proc, config.combine, c_prime);
  return "(=> (and " + f.ge(rep.from) + " " + f.lt(rep.to) + ") (= " + name("v", rep.proc) + " " +
         lit(rep.old_value) + "))";
}

std::string encode_predicate(const Predicate& p, int n) {
  std::vector<std::string> terms;
  switch (p.form) {
    case PredicateForm::Conjunction:
      for (int i = 1; i <= n; ++i) terms.push_back(is_one(i));
      return join("and", terms, "true");
    case PredicateForm::ExactlyK:
    case PredicateForm::AtLeastK: {
      for (int i = 1; i <= n; ++i) terms.push_back("(ite " + is_one(i) + " 1 0)");
      const char* op = p.form == PredicateForm::ExactlyK ? "=" : ">=";
      return std::string("(") + op + " " + join("+", terms, "0") + " " + lit(p.k) + ")";
    }
    case PredicateForm::SumEq:
    case PredicateForm::SumGeq: {
      for (int i = 1; i <= n; ++i) terms.push_back(name("v", i));
      const char* op = p.form == PredicateForm::SumEq ? "=" : ">=";
      return std::string("(") + op + " " + join("+", terms, "0") + " " + lit(p.k) + ")";
    }
    case PredicateForm::PairwiseConflict:
      for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) terms.push_back("(and " + is_one(i) + " " + is_one(j) + ")");
      return join("or", terms, "false");
    case PredicateForm::Cnf:
      for (const auto& clause : p.clauses) {
        std::vector<std::string> lits;
        for (int l : clause) {
          const int var = std::abs(l);
          if (var < 1 || var > n) throw EncodingError("CNF literal " + std::to_string(l) + " names no process");
          lits.push_back("(= " + name("v", var) + (l > 0 ? " 1)" : " 0)"));
        }
        terms.push_back(join("or", lits, "false"));
      }
      return join("and", terms, "true");
  }
  throw EncodingError("unknown predicate form");
}

ConstraintScript encode_window(int n, std::span<const VarReport> vars, std::span<const MsgReport> msgs,
                               const Predicate& predicate, const Window& window, const EncoderConfig& config) {
  if (n < 1) throw EncodingError("need at least one process");
  if (window.to <= window.from || window.from < 0) throw EncodingError("empty monitoring window");

  std::int64_t c_max = 0;
  for (const auto& v : vars) c_max = std::max({c_max, v.from.c, v.to.c});
  for (const auto& m : msgs) c_max = std::max({c_max, m.send.c, m.recv.c});

  ConstraintScript s;
  s.n = n;
  s.combined = config.combine;
  s.c_prime = choose_c_prime(config, c_max);
  s.window = window;

  for (int i = 1; i <= n; ++i) {
    s.declarations.push_back("(declare-const " + name("v", i) + " Int)");
    if (config.combine) {
      s.declarations.push_back("(declare-const " + name("nl", i) + " Int)");
    } else {
      s.declarations.push_back("(declare-const " + name("l", i) + " Int)");
      s.declarations.push_back("(declare-const " + name("c", i) + " Int)");
    }
  }
  for (int i = 1; i <= n; ++i) {
    const auto v = name("v", i);
    s.bounds.push_back("(and (<= 0 " + v + ") (<= " + v + " 1))");
    if (config.combine) {
      const auto nl = name("nl", i);
      s.bounds.push_back("(and (<= " + lit(s.c_prime * window.from) + " " + nl + ") (< " + nl + " " +
                         lit(s.c_prime * window.to) + "))");
    } else {
      const auto l = name("l", i);
      const auto c = name("c", i);
      s.bounds.push_back("(and (<= " + lit(window.from) + " " + l + ") (< " + l + " " + lit(window.to) + "))");
      s.bounds.push_back("(and (<= 0 " + c + ") (< " + c + " " + lit(s.c_prime) + "))");
    }
  }

  s.clock_sync = encode_clock_sync(n, config, s.c_prime);

  auto check_proc = [n](ProcessId p) {
    if (p < 1 || p > n) throw EncodingError("report names process " + std::to_string(p) + " outside 1.." + std::to_string(n));
  };
  std::vector<MsgReport> sorted_msgs(msgs.begin(), msgs.end());
  std::sort(sorted_msgs.begin(), sorted_msgs.end(), [](const MsgReport& a, const MsgReport& b) {
    return std::tie(a.receiver, a.recv, a.sender, a.send) < std::tie(b.receiver, b.recv, b.sender, b.send);
  });
  for (const auto& m : sorted_msgs) {
    check_proc(m.sender);
    check_proc(m.receiver);
    s.communication.push_back(encode_communication(m, config, s.c_prime));
  }

  std::vector<VarReport> sorted_vars(vars.begin(), vars.end());
  std::sort(sorted_vars.begin(), sorted_vars.end(), [](const VarReport& a, const VarReport& b) {
    return std::tie(a.proc, a.from, a.to, a.old_value) < std::tie(b.proc, b.from, b.to, b.old_value);
  });
  for (const auto& v : sorted_vars) {
    check_proc(v.proc);
    s.var_events.push_back(encode_var_event(v, config, s.c_prime));
  }

  s.predicate = encode_predicate(predicate, n);
  return s;
}

ConstraintScript encode_trace(const Trace& trace, const Predicate& predicate, const EncoderConfig& config) {
  std::vector<VarReport> vars;
  std::vector<MsgReport> msgs;
  for (const auto& r : reports_from_trace(trace)) {
    if (const auto* v = std::get_if<VarReport>(&r)) vars.push_back(*v);
    else msgs.push_back(std::get<MsgReport>(r));
  }
  return encode_window(trace.n, vars, msgs, predicate, {0, trace.horizon}, config);
}

std::string ConstraintScript::render() const {
  std::ostringstream out;
  out << "(set-logic QF_LIA)\n(set-option :produce-models true)\n";
  out << "; window l in [" << window.from << ", " << window.to << "), " << (combined ? "combined" : "uncombined")
      << ", c' = " << c_prime << "\n";
  for (const auto& d : declarations) out << d << '\n';
  auto emit = [&out](const char* title, const std::vector<std::string>& family) {
    out << "; " << title << '\n';
    for (const auto& a : family) out << "(assert " << a << ")\n";
  };
  emit("bounds", bounds);
  emit("clock synchronization", clock_sync);
  emit("communication", communication);
  emit("variable events", var_events);
  out << "; predicate\n(assert " << predicate << ")\n";
  out << "(check-sat)\n(get-model)\n";
  return out.str();
}

}  // namespace psmon
