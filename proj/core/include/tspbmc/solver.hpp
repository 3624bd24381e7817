#pragma once

// External SMT-LIB2 solver driver and the bound-deepening loop.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tspbmc/sexpr.hpp"
#include "tspbmc/smt_encoder.hpp"

namespace tspbmc {

struct SolverConfig {
  std::string command = "z3 -in";
  double timeout_seconds = 60;
  /// nullopt means twice the number of execution steps.
  std::optional<int> max_bound;

  /// Throws ModelError on timeout <= 0 or max_bound < 1.
  void validate() const;
  int effective_max_bound(const TiisModel& model) const;
};

/// `command` from $TSPBMC_SOLVER when set, otherwise "z3 -in".
std::string default_solver_command();

enum class SolverStatus { sat, unsat, unknown, timeout, error };

std::string_view to_string(SolverStatus s);

struct RawResult {
  SolverStatus status = SolverStatus::error;
  std::map<std::string, ModelValue> values;
  std::string solver_stderr;
  /// Unparsed solver output when status is error.
  std::string raw_output;
};

/// Runs one script in a fresh child. Spawn failures become status error.
RawResult run_solver(const SmtScript& script, const SolverConfig& config);

struct BoundLog {
  int bound = 0;
  SolverStatus status = SolverStatus::error;
  double seconds = 0;
};

struct Verdict {
  enum class Outcome { attack_found, no_attack, inconclusive };

  Outcome outcome = Outcome::inconclusive;
  /// Attack bound, or the max bound reached, or the offending bound.
  int bound = 0;
  std::string reason;
  std::optional<RawResult> result;
  std::optional<SmtScript> script;
  std::vector<BoundLog> log;
};

/// n = 1, 2, ... up to the max bound; stops at the first sat.
Verdict iterate_bounds(const TiisModel& model, const SolverConfig& config);

}  // namespace tspbmc
