#pragma once

// Explicit-state bounded reachability over the concrete timed semantics.
// Timing is tracked symbolically as a difference-bound zone over the fire
// times that later constraints can still refer to.

#include <optional>

#include "tspbmc/witness.hpp"

namespace tspbmc {

struct OracleResult {
  bool attack = false;
  /// Minimal attack depth, or the depth cap when no attack exists.
  int depth = 0;
  std::optional<Trace> trace;
  std::size_t states = 0;
};

/// Breadth-first search up to `depth` transitions. Throws ModelError if
/// depth < 1.
OracleResult explicit_reach(const TiisModel& model, int depth);

/// Same question answered by iterative deepening depth-first search without
/// state merging. Slow; used to cross-check minimality.
OracleResult iterative_deepening_reach(const TiisModel& model, int depth);

}  // namespace tspbmc
