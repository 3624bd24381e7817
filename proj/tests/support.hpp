#pragma once

#include <cstdlib>
#include <random>
#include <string>

#include "tspbmc/library.hpp"
#include "tspbmc/protocol.hpp"
#include "tspbmc/solver.hpp"
#include "tspbmc/tiis.hpp"

namespace tspbmc::testing {

inline ProtocolSpec library_spec(const std::string& name) {
  return parse_protocol(find_library_entry(name)->protocol_text);
}

inline Scenario library_scenario(const std::string& protocol, const std::string& scenario) {
  return parse_scenario(find_library_entry(protocol)->scenarios.at(scenario));
}

inline TiisModel library_model(const std::string& protocol, const std::string& scenario, int k) {
  return build_model(library_spec(protocol), library_scenario(protocol, scenario), k);
}

inline bool solver_available() {
  static const bool ok = std::system("z3 -version > /dev/null 2>&1") == 0;
  return ok;
}

inline SolverConfig test_solver(int max_bound) {
  SolverConfig c;
  c.command = "z3 -in";
  c.timeout_seconds = 60;
  c.max_bound = max_bound;
  return c;
}

/// Random well-formed term over a small alphabet.
class TermGen {
 public:
  explicit TermGen(unsigned seed) : rng_(seed) {}

  Term atom() {
    static const char* agents[] = {"A", "B", "S", "I", "C2"};
    switch (pick(6)) {
      case 0: return Term::ident(agents[pick(5)]);
      case 1: return Term::pub_key(agents[pick(5)]);
      case 2: return Term::priv_key(agents[pick(5)]);
      case 3: return Term::sym_key(agents[pick(5)], agents[pick(5)]);
      default: return fresh_atom();
    }
  }

  Term key() {
    static const char* agents[] = {"A", "B", "S", "I"};
    switch (pick(4)) {
      case 0: return Term::pub_key(agents[pick(4)]);
      case 1: return Term::priv_key(agents[pick(4)]);
      case 2: return Term::sym_key(agents[pick(4)], agents[pick(4)]);
      default: return Term::fresh("Kab", "A", FreshClass::sesskey, sid());
    }
  }

  Term term(int depth) {
    if (depth == 0 || pick(4) == 0) return atom();
    if (pick(2) == 0) return Term::pair(term(depth - 1), term(depth - 1));
    return Term::cipher(key(), term(depth - 1));
  }

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

 private:
  std::optional<int> sid() {
    if (pick(3) == 0) return std::nullopt;
    return 1 + pick(12);
  }

  Term fresh_atom() {
    static const char* names[] = {"Ta", "Tb", "Na", "Nb", "ts", "Kab"};
    return Term::fresh(names[pick(6)], "A", FreshClass::nonce, sid());
  }

  std::mt19937 rng_;
};

}  // namespace tspbmc::testing
