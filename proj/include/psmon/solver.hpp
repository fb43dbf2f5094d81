#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>

#include "psmon/encoder.hpp"

namespace psmon {

enum class Verdict { Sat, Unsat, Error };

const char* to_string(Verdict v);

struct SolverResult {
  Verdict verdict = Verdict::Error;
  std::optional<SnapshotAssignment> model;  // set iff Sat
  std::string diagnostics;  // solver output on Error
  double wall_seconds = 0.0;  // solver process only
};

/// Runs an external SMT-LIB2 solver as a subprocess.
///
/// The command is split on whitespace; the token `{file}` is replaced by
/// the path of a temporary file holding the script, or the path is appended
/// when no such token exists. A timeout, crash, non-sat/unsat answer, or
/// unparsable model is an Error verdict, never Unsat.
class SolverRunner {
 public:
  explicit SolverRunner(std::string command = default_command(), std::chrono::milliseconds timeout = std::chrono::seconds(60));

  /// PSMON_SOLVER from the environment, else "z3 -smt2 {file}".
  static std::string default_command();

  const std::string& command() const { return command_; }
  std::chrono::milliseconds timeout() const { return timeout_; }

  /// Solves rendered SMT-LIB2 text; on Sat the model values are returned by name.
  struct RawResult {
    Verdict verdict = Verdict::Error;
    std::map<std::string, std::int64_t> values;
    std::string diagnostics;
    double wall_seconds = 0.0;
  };
  RawResult solve_text(const std::string& smt2) const;

 private:
  std::string command_;
  std::chrono::milliseconds timeout_;
};

/// Reads `(define-fun name () Int value)` entries from a get-model response.
std::map<std::string, std::int64_t> parse_model(const std::string& text);

/// Maps solver values back to per-process frontier timestamps and values.
SnapshotAssignment decode_model(const ConstraintScript& script, const std::map<std::string, std::int64_t>& values);

SolverResult check(const ConstraintScript& script, const SolverRunner& solver);

}  // namespace psmon
