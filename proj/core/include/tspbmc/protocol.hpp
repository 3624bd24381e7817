#pragma once

// Alice-Bob protocol files, JSON attack scenarios, and their expansion into
// the multi-session execution skeleton.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tspbmc/rational.hpp"
#include "tspbmc/term.hpp"

namespace tspbmc {

struct ProtocolStep {
  int index = 0;
  AgentId sender;
  AgentId receiver;
  Term message;  // template; fresh atoms carry no session index
  Rational min_delay{0};
};

struct FreshSpec {
  std::string name;
  AgentId owner;
  FreshClass cls = FreshClass::nonce;
  std::optional<Rational> lifetime;
};

struct Goal {
  std::string secret;            // fresh atom name, instantiated per session
  std::optional<int> target_sid; // nullopt = any session
  /// Sessions that must reach their final step; nullopt = the default set.
  std::optional<std::set<int>> require_complete;
};

struct ProtocolSpec {
  std::string name;
  std::vector<AgentId> roles;
  std::vector<FreshSpec> fresh_decls;
  std::vector<ProtocolStep> steps;
  Goal goal;

  Vocabulary vocabulary() const;
  const FreshSpec* find_fresh(std::string_view name) const;
  bool is_role(std::string_view agent) const;
};

/// Parses the line-based Alice-Bob format. Throws ProtocolError.
ProtocolSpec parse_protocol(std::string_view text);

enum class OverrideKind { replace, intruder, retime };

std::string_view to_string(OverrideKind kind);

struct Override {
  int sid = 0;
  int step = 0;
  OverrideKind kind = OverrideKind::replace;
  std::optional<AgentId> edge_sender;
  std::optional<AgentId> edge_receiver;
  std::optional<Term> message;
  std::optional<Rational> delay;
  /// Fresh name -> lifetime for that name's instance in session `sid`.
  std::map<std::string, Rational> lifetime_overrides;
};

struct Scenario {
  std::string name;
  std::vector<Override> overrides;
  std::optional<int> sessions;
  bool eavesdrop = true;
  /// Terms handed to the intruder up front (key-compromise scenarios).
  std::vector<Term> compromised;
};

/// Decodes a scenario JSON document. Throws ScenarioError.
Scenario parse_scenario(std::string_view json_text);

struct StepRef {
  int sid = 0;
  int index = 0;

  friend auto operator<=>(const StepRef&, const StepRef&) = default;
};

struct LifetimeCheck {
  Term fresh;
  Rational bound;
};

struct ExecStep {
  int sid = 0;
  int index = 0;
  AgentId sender;
  AgentId receiver;
  Term message;
  Rational min_delay{0};
  bool gated = false;
  std::vector<LifetimeCheck> lifetime_checks;

  StepRef ref() const { return {sid, index}; }
};

/// Replicates the protocol over sessions 1..k and applies the scenario's
/// overrides in place. Output order is session-major, step-minor.
/// Throws ScenarioError for out-of-range or ill-formed overrides.
std::vector<ExecStep> apply_overrides(const ProtocolSpec& spec, const Scenario& scenario, int k);

/// Generation step of every fresh atom in `steps`: the first step (in
/// session-major order) sent by the atom's owner that contains it, or failing
/// that the first step containing it at all.
std::map<Term, StepRef> generation_steps(const std::vector<ExecStep>& steps);

}  // namespace tspbmc
