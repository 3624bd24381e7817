#pragma once

// Verification model: execution steps (environment), term universe, and the
// Dolev-Yao derivation rules behind the per-agent knowledge automata.

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tspbmc/protocol.hpp"
#include "tspbmc/term.hpp"

namespace tspbmc {

using TermId = std::size_t;

/// Finite, subterm-closed carrier ordered by canonical text.
class TermUniverse {
 public:
  TermUniverse() = default;
  explicit TermUniverse(const std::set<Term>& terms);

  std::size_t size() const { return terms_.size(); }
  const Term& at(TermId id) const { return terms_.at(id); }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t depth() const { return depth_; }

  bool contains(const Term& t) const { return ids_.count(t.text()) != 0; }
  /// Throws ModelError when `t` is not a member.
  TermId id(const Term& t) const;

 private:
  std::vector<Term> terms_;
  std::map<std::string, TermId> ids_;
  std::size_t depth_ = 0;
};

enum class RuleKind { split_left, split_right, decrypt, pair, encrypt };

std::string_view to_string(RuleKind kind);

inline bool is_decomposition(RuleKind k) {
  return k == RuleKind::split_left || k == RuleKind::split_right || k == RuleKind::decrypt;
}

struct DerivationRule {
  RuleKind kind{};
  std::vector<TermId> premises;
  TermId conclusion = 0;
};

/// Layer plan for bounded derivation: `decompose` layers of decomposition
/// rules, then `compose` layers of composition rules. Keys are atoms, so
/// composing never enables a new decomposition and one pass of each reaches
/// the fixpoint.
struct Strata {
  std::size_t decompose = 0;
  std::size_t compose = 0;

  std::size_t top() const { return decompose + compose; }
  /// Layer d in 1..top applies decomposition rules iff this holds.
  bool decomposes(std::size_t d) const { return d <= decompose; }
};

/// Decomposition chains shrink term depth until a newly learned key opens an
/// older cipher, so D * (K + 1) decomposition layers suffice, K being the
/// number of keys that can be extracted from messages. Composition needs D.
Strata plan_strata(const TermUniverse& universe, const std::vector<DerivationRule>& rules);

/// Set of term ids, indexed by TermId.
using Knowledge = std::vector<bool>;

struct TiisModel {
  std::string protocol_name;
  std::string scenario_name;
  int sessions = 1;
  std::vector<AgentId> agents;  // roles followed by I
  std::vector<ExecStep> exec_steps;
  TermUniverse universe;
  std::vector<DerivationRule> rules;
  std::size_t depth = 0;
  Strata strata;
  std::map<AgentId, std::set<TermId>> initial_knowledge;
  std::map<TermId, StepRef> generation;
  bool eavesdrop = true;
  Goal goal;
  /// Goal sessions after defaulting and clipping to 1..sessions.
  std::set<int> require_complete;

  std::size_t step_count(int sid) const;
  /// Index into exec_steps.
  std::size_t position_of(StepRef ref) const;
  const ExecStep& step(StepRef ref) const { return exec_steps.at(position_of(ref)); }
  std::size_t agent_index(const AgentId& a) const;
  /// Universe ids of the secret's instances the goal refers to. Empty when
  /// the goal targets a session beyond `sessions`.
  std::vector<TermId> secret_ids() const;
};

/// Subterm closure of the step messages plus identities, long-term keys and
/// `extra` terms, closed under key inversion.
TermUniverse build_universe(const std::vector<ExecStep>& steps, const std::vector<AgentId>& agents,
                            const std::vector<Term>& extra = {});

/// Initial knowledge of `agent`: identities, public keys, its own private key,
/// shared keys it is party to, and for the intruder the compromised terms.
std::set<TermId> initial_knowledge(const AgentId& agent, const ProtocolSpec& spec,
                                   const TermUniverse& universe,
                                   const std::vector<Term>& compromised = {});

std::vector<DerivationRule> compile_rules(const TermUniverse& universe);

/// Throws ModelError / ScenarioError on inconsistent inputs.
TiisModel build_model(const ProtocolSpec& spec, const Scenario& scenario, int k);

/// Least fixpoint of rule application from `known`.
Knowledge closure(const Knowledge& known, const std::vector<DerivationRule>& rules);
std::set<TermId> closure(const std::set<TermId>& known, const std::vector<DerivationRule>& rules,
                         std::size_t universe_size);

/// Applies one layer of rules per stratum following `strata`. Mirrors the
/// SMT knowledge encoding.
Knowledge stratified_closure(const Knowledge& known, const std::vector<DerivationRule>& rules,
                             const Strata& strata);

/// Gating predicate over an already closed knowledge set.
bool constructible(const Knowledge& closed, const Term& t, const TermUniverse& universe);
bool constructible(const std::set<TermId>& known, const Term& t, const TiisModel& model);

Knowledge to_knowledge(const std::set<TermId>& ids, std::size_t universe_size);
std::set<TermId> to_set(const Knowledge& k);

/// Protocol well-formedness: in the unmodified run each honest receiver can
/// open every cipher addressed to it. Returns one message per problem.
std::vector<std::string> honest_decryptability_warnings(const TiisModel& model);

}  // namespace tspbmc
