#pragma once

// Attack traces: decoding from solver models, concrete replay, and reports.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tspbmc/solver.hpp"

namespace tspbmc {

struct TraceEvent {
  int position = 0;
  StepRef step;
  AgentId sender;
  AgentId receiver;
  Term message;
  Rational time{0};
  /// Terms each agent newly knows after this event (closed knowledge).
  std::map<AgentId, std::vector<Term>> deltas;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct GoalWitness {
  std::string secret;  // secret instance known to I, e.g. "Tb#1"
  bool known_by_intruder = true;
  std::vector<int> completed_sessions;

  friend bool operator==(const GoalWitness&, const GoalWitness&) = default;
};

struct Trace {
  std::string protocol;
  std::string scenario;
  int sessions = 0;
  int bound = 0;
  std::vector<TraceEvent> events;
  GoalWitness goal;

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Builds the trace from a sat model, truncated at the first goal position.
/// Throws ModelError for missing values, several steps at one position, or a
/// model in which the goal never holds.
Trace decode(const RawResult& result, const SmtScript& script, const TiisModel& model);

enum class ViolationKind {
  structure,
  session_order,
  time_monotone,
  delay,
  generation,
  lifetime,
  gating,
  knowledge,
  goal,
};

std::string_view to_string(ViolationKind kind);

struct ReplayReport {
  bool valid = true;
  ViolationKind kind = ViolationKind::structure;
  /// Position of the offending event, 0 for whole-trace problems.
  int position = 0;
  std::string detail;

  explicit operator bool() const { return valid; }
};

/// Re-executes `trace` under the concrete semantics with unbounded closure.
ReplayReport replay(const Trace& trace, const TiisModel& model);

/// Knowledge deltas recomputed by concrete execution of the events' steps.
/// Positions and times are kept; deltas are replaced.
void fill_deltas(Trace& trace, const TiisModel& model);

/// Goal witness for the state after all events, or nullopt if the goal fails.
std::optional<GoalWitness> evaluate_goal(const Trace& trace, const TiisModel& model);

std::string render_text(const Trace& trace);
std::string render_json(const Trace& trace);
std::string render_html(const Trace& trace);

/// Inverse of render_json. Throws Error on malformed documents.
Trace parse_trace_json(std::string_view json_text);

}  // namespace tspbmc
