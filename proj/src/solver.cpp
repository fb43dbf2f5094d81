#include "psmon/solver.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "psmon/error.hpp"

extern char** environ;

namespace psmon {

namespace {

struct Sexp {
  std::string atom;
  std::vector<Sexp> items;
  bool is_list = false;
};

class SexpReader {
 public:
  explicit SexpReader(const std::string& text) : text_(text) {}

  bool next(Sexp& out) {
    skip();
    if (pos_ >= text_.size()) return false;
    out = read();
    return true;
  }

 private:
  void skip() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      else if (text_[pos_] == ';') while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      else break;
    }
  }

  Sexp read() {
    skip();
    if (pos_ >= text_.size()) throw Error("unexpected end of solver output");
    Sexp s;
    if (text_[pos_] == '(') {
      ++pos_;
      s.is_list = true;
      for (skip(); pos_ < text_.size() && text_[pos_] != ')'; skip()) s.items.push_back(read());
      if (pos_ >= text_.size()) throw Error("unbalanced parentheses in solver output");
      ++pos_;
    } else if (text_[pos_] == ')') {
      throw Error("unbalanced parentheses in solver output");
    } else if (text_[pos_] == '"') {
      auto end = text_.find('"', pos_ + 1);
      if (end == std::string::npos) throw Error("unterminated string in solver output");
      s.atom = text_.substr(pos_, end - pos_ + 1);
      pos_ = end + 1;
    } else {
      auto start = pos_;
      while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
             text_[pos_] != ')')
        ++pos_;
      s.atom = text_.substr(start, pos_ - start);
    }
    return s;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

std::int64_t int_value(const Sexp& s) {
  if (!s.is_list) return std::stoll(s.atom);
  if (s.items.size() == 2 && !s.items[0].is_list && s.items[0].atom == "-") return -int_value(s.items[1]);
  throw Error("non-integer model value");
}

void collect_defines(const Sexp& s, std::map<std::string, std::int64_t>& out) {
  if (!s.is_list) return;
  if (s.items.size() == 5 && !s.items[0].is_list && s.items[0].atom == "define-fun" && s.items[2].is_list &&
      s.items[2].items.empty()) {
    out[s.items[1].atom] = int_value(s.items[4]);
    return;
  }
  for (const auto& item : s.items) collect_defines(item, out);
}

std::vector<std::string> split(const std::string& command) {
  std::istringstream in(command);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

class TempScript {
 public:
  explicit TempScript(const std::string& text) {
    auto pattern = (std::filesystem::temp_directory_path() / "psmon-XXXXXX.smt2").string();
    std::vector<char> buf(pattern.begin(), pattern.end());
    buf.push_back('\0');
    int fd = ::mkstemps(buf.data(), 5);
    if (fd < 0) throw Error(std::string("cannot create temporary script: ") + std::strerror(errno));
    path_ = buf.data();
    std::size_t written = 0;
    while (written < text.size()) {
      auto n = ::write(fd, text.data() + written, text.size() - written);
      if (n <= 0) {
        ::close(fd);
        throw Error("cannot write temporary script");
      }
      written += static_cast<std::size_t>(n);
    }
    ::close(fd);
  }
  ~TempScript() { std::filesystem::remove(path_); }
  TempScript(const TempScript&) = delete;
  TempScript& operator=(const TempScript&) = delete;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Sat: return "sat";
    case Verdict::Unsat: return "unsat";
    case Verdict::Error: return "error";
  }
  return "?";
}

SolverRunner::SolverRunner(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {
  if (split(command_).empty()) throw Error("empty solver command");
}

std::string SolverRunner::default_command() {
  if (const char* env = std::getenv("PSMON_SOLVER"); env && *env) return env;
  return "z3 -smt2 {file}";
}

std::map<std::string, std::int64_t> parse_model(const std::string& text) {
  std::map<std::string, std::int64_t> out;
  SexpReader reader(text);
  for (Sexp s; reader.next(s);) collect_defines(s, out);
  return out;
}

SolverRunner::RawResult SolverRunner::solve_text(const std::string& smt2) const {
  RawResult result;
  TempScript script(smt2);

  auto args = split(command_);
  bool substituted = false;
  for (auto& a : args)
    if (a == "{file}") {
      a = script.path();
      substituted = true;
    }
  if (!substituted) args.push_back(script.path());
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  int pipefd[2];
  if (::pipe2(pipefd, O_CLOEXEC) != 0) throw Error("cannot create pipe for solver");
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, pipefd[1], STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, pipefd[1], STDERR_FILENO);

  const auto started = std::chrono::steady_clock::now();
  pid_t pid = 0;
  int rc = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(pipefd[1]);
  if (rc != 0) {
    ::close(pipefd[0]);
    result.diagnostics = "cannot start solver '" + args[0] + "': " + std::strerror(rc);
    return result;
  }

  std::string output;
  bool timed_out = false;
  const auto deadline = started + timeout_;
  char buf[4096];
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd pfd{pipefd[0], POLLIN, 0};
    int ready = ::poll(&pfd, 1, static_cast<int>(std::min<std::int64_t>(left.count(), 1000)));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) continue;
    auto n = ::read(pipefd[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    output.append(buf, static_cast<std::size_t>(n));
  }
  if (timed_out) ::kill(pid, SIGKILL);
  ::close(pipefd[0]);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (timed_out) {
    result.diagnostics = "solver timed out after " + std::to_string(timeout_.count()) + " ms";
    return result;
  }
  if (WIFSIGNALED(status)) {
    result.diagnostics = "solver killed by signal " + std::to_string(WTERMSIG(status)) + "\n" + output;
    return result;
  }

  std::istringstream in(output);
  std::string first;
  in >> first;
  if (first == "unsat") {
    // get-model after unsat is an error for most solvers; the verdict stands.
    result.verdict = Verdict::Unsat;
  } else if (first == "sat") {
    try {
      result.values = parse_model(output.substr(output.find("sat") + 3));
      result.verdict = Verdict::Sat;
    } catch (const std::exception& e) {
      result.diagnostics = std::string("unreadable model: ") + e.what() + "\n" + output;
    }
  } else {
    result.diagnostics = "solver exit status " + std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1) +
                         ", output:\n" + output;
  }
  return result;
}

SnapshotAssignment decode_model(const ConstraintScript& script, const std::map<std::string, std::int64_t>& values) {
  auto get = [&values](const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) throw Error("model lacks a value for " + key);
    return it->second;
  };
  SnapshotAssignment s;
  for (int i = 1; i <= script.n; ++i) {
    const auto idx = std::to_string(i);
    SnapshotEntry e;
    e.value = static_cast<int>(get("v_" + idx));
    if (script.combined) {
      const std::int64_t nl = get("nl_" + idx);
      e.at.l = floor_div(nl, script.c_prime);
      e.at.c = nl - e.at.l * script.c_prime;
    } else {
      e.at = {get("l_" + idx), get("c_" + idx)};
    }
    s.entries.push_back(e);
  }
  return s;
}

SolverResult check(const ConstraintScript& script, const SolverRunner& solver) {
  auto raw = solver.solve_text(script.render());
  SolverResult out;
  out.verdict = raw.verdict;
  out.diagnostics = std::move(raw.diagnostics);
  out.wall_seconds = raw.wall_seconds;
  if (out.verdict == Verdict::Sat) {
    try {
      out.model = decode_model(script, raw.values);
    } catch (const Error& e) {
      out.verdict = Verdict::Error;
      out.diagnostics = e.what();
    }
  }
  return out;
}

}  // namespace psmon
