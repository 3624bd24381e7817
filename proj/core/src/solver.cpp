#include "tspbmc/solver.hpp"

#include <cstdlib>

#include "tspbmc/error.hpp"
#include "tspbmc/subprocess.hpp"

namespace tspbmc {

namespace {

using Clock = Subprocess::Clock;

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

struct StatusLine {
  SolverStatus status;
  std::size_t end;  // offset just past the line
};

// First complete line that is a check-sat answer or an error report.
std::optional<StatusLine> find_status(std::string_view out) {
  std::size_t pos = 0;
  while (pos < out.size()) {
    std::size_t nl = out.find('\n', pos);
    if (nl == std::string_view::npos) return std::nullopt;
    std::string line = trim(out.substr(pos, nl - pos));
    if (line == "sat") return StatusLine{SolverStatus::sat, nl + 1};
    if (line == "unsat") return StatusLine{SolverStatus::unsat, nl + 1};
    if (line == "unknown") return StatusLine{SolverStatus::unknown, nl + 1};
    // "(error ...)" or anything else unexpected before the status
    if (!line.empty()) return StatusLine{SolverStatus::error, nl + 1};
    pos = nl + 1;
  }
  return std::nullopt;
}

Clock::time_point deadline_after(double seconds) {
  return Clock::now() + std::chrono::microseconds(static_cast<long long>(seconds * 1e6));
}

}  // namespace

void SolverConfig::validate() const {
  if (!(timeout_seconds > 0)) throw ModelError("solver timeout must be positive");
  if (max_bound && *max_bound < 1) throw ModelError("max bound must be >= 1");
  if (command.find_first_not_of(" \t") == std::string::npos) throw ModelError("empty solver command");
}

int SolverConfig::effective_max_bound(const TiisModel& model) const {
  if (max_bound) return *max_bound;
  return std::max(1, static_cast<int>(2 * model.exec_steps.size()));
}

std::string default_solver_command() {
  const char* env = std::getenv("TSPBMC_SOLVER");
  if (env && *env) return env;
  return "z3 -in";
}

std::string_view to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::sat: return "sat";
    case SolverStatus::unsat: return "unsat";
    case SolverStatus::unknown: return "unknown";
    case SolverStatus::timeout: return "timeout";
    case SolverStatus::error: return "error";
  }
  return "error";
}

RawResult run_solver(const SmtScript& script, const SolverConfig& config) {
  RawResult r;
  auto deadline = deadline_after(config.timeout_seconds);
  std::optional<Subprocess> child;
  try {
    child.emplace(split_command(config.command));
  } catch (const SolverError& e) {
    r.solver_stderr = e.what();
    return r;
  }

  auto status_ready = [](std::string_view out) { return find_status(out).has_value(); };
  auto st = child->exchange(script.text, status_ready, deadline);
  r.solver_stderr = child->err();
  if (st == Subprocess::Status::timeout) {
    child->kill();
    r.status = SolverStatus::timeout;
    return r;
  }
  auto line = find_status(child->out());
  if (!line) {
    child->finish(deadline_after(1));
    r.raw_output = child->out();
    r.solver_stderr = child->err();
    return r;
  }
  r.status = line->status;
  if (r.status == SolverStatus::error) r.raw_output = child->out();
  if (r.status != SolverStatus::sat || script.symbols.empty()) {
    child->exchange("(exit)\n", nullptr, deadline_after(1));
    child->finish(deadline_after(1));
    return r;
  }

  std::string query = "(get-value (";
  for (std::size_t i = 0; i < script.symbols.size(); ++i) {
    if (i) query += ' ';
    query += script.symbols[i];
  }
  query += "))\n";
  std::size_t start = line->end;
  auto reply_ready = [start](std::string_view out) { return sexpr_complete(out.substr(start)); };
  st = child->exchange(query, reply_ready, deadline);
  r.solver_stderr = child->err();
  if (st == Subprocess::Status::timeout) {
    child->kill();
    r.status = SolverStatus::timeout;
    return r;
  }
  std::string reply = child->out().substr(start);
  child->exchange("(exit)\n", nullptr, deadline_after(1));
  child->finish(deadline_after(1));

  try {
    SExpr e = parse_sexpr(reply);
    if (!e.is_list) throw Error("get-value reply is not a list");
    for (const SExpr& binding : e.list) {
      if (!binding.is_list || binding.list.size() != 2 || !binding.list[0].is_atom())
        throw Error("malformed get-value binding: " + print_sexpr(binding));
      r.values[binding.list[0].atom] = sexpr_to_value(binding.list[1]);
    }
    for (const std::string& sym : script.symbols)
      if (!r.values.count(sym)) throw Error("solver omitted value for " + sym);
  } catch (const Error& e) {
    r.status = SolverStatus::error;
    r.values.clear();
    r.raw_output = reply;
    r.solver_stderr += e.what();
  }
  return r;
}

Verdict iterate_bounds(const TiisModel& model, const SolverConfig& config) {
  config.validate();
  Verdict v;
  int max_bound = config.effective_max_bound(model);
  for (int n = 1; n <= max_bound; ++n) {
    auto started = Clock::now();
    SmtScript script = encode({model, n});
    RawResult r = run_solver(script, config);
    double secs = std::chrono::duration<double>(Clock::now() - started).count();
    v.log.push_back({n, r.status, secs});
    switch (r.status) {
      case SolverStatus::unsat: continue;
      case SolverStatus::sat:
        v.outcome = Verdict::Outcome::attack_found;
        v.bound = n;
        v.result = std::move(r);
        v.script = std::move(script);
        return v;
      default:
        v.outcome = Verdict::Outcome::inconclusive;
        v.bound = n;
        v.reason = "solver returned " + std::string(to_string(r.status)) + " at bound " + std::to_string(n);
        {
          std::string detail = trim(r.solver_stderr.empty() ? r.raw_output : r.solver_stderr);
          if (!detail.empty()) v.reason += ": " + detail.substr(0, 400);
        }
        v.result = std::move(r);
        return v;
    }
  }
  v.outcome = Verdict::Outcome::no_attack;
  v.bound = max_bound;
  return v;
}

}  // namespace tspbmc
