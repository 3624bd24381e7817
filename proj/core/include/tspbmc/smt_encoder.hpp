#pragma once

// Bounded reachability EF(psi) over interleaved, timed, knowledge-annotated
// runs, compiled to an SMT-LIB2 (QF_LRA) script.
//
// Symbols (decimal indices, no padding):
//   fire_<j>_<sid>_<i>         Bool  step (sid,i) fires at position j
//   done_<j>_<sid>_<i>         Bool  step (sid,i) has fired at or before j
//   t_<sid>_<i>                Real  fire time of step (sid,i)
//   tau_<j>                    Real  time of position j
//   k_<agent>_<tid>_<j>_<d>    Bool  agent knows universe term tid at position
//                                    j, derivation stratum d in 0..top

#include <string>
#include <vector>

#include "tspbmc/tiis.hpp"

namespace tspbmc {

struct BmcProblem {
  const TiisModel& model;
  int bound = 1;
};

struct SmtScript {
  std::string text;
  /// Every declared symbol, sorted.
  std::vector<std::string> symbols;
  std::vector<int> goal_positions;
  int bound = 0;
  /// Index of the last derivation stratum.
  std::size_t top_stratum = 0;
};

namespace smt_names {
std::string fire(int j, StepRef s);
std::string done(int j, StepRef s);
std::string time(StepRef s);
std::string tau(int j);
std::string know(const AgentId& agent, TermId tid, int j, std::size_t d);
}  // namespace smt_names

/// Byte-deterministic script. Throws ModelError if bound < 1.
SmtScript encode(const BmcProblem& problem);

/// psi_j: required sessions complete and the intruder knows a secret instance.
std::string goal_formula(const TiisModel& model, int j);

}  // namespace tspbmc
