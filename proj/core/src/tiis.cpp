#include "tspbmc/tiis.hpp"

#include <algorithm>

#include "tspbmc/error.hpp"

namespace tspbmc {

TermUniverse::TermUniverse(const std::set<Term>& terms) : terms_(terms.begin(), terms.end()) {
  for (TermId i = 0; i < terms_.size(); ++i) {
    ids_.emplace(terms_[i].text(), i);
    depth_ = std::max(depth_, terms_[i].depth());
  }
}

TermId TermUniverse::id(const Term& t) const {
  auto it = ids_.find(t.text());
  if (it == ids_.end()) throw ModelError("term '" + t.text() + "' is not in the universe");
  return it->second;
}

std::string_view to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::split_left: return "split-left";
    case RuleKind::split_right: return "split-right";
    case RuleKind::decrypt: return "decrypt";
    case RuleKind::pair: return "pair";
    case RuleKind::encrypt: return "encrypt";
  }
  return "pair";
}

std::size_t TiisModel::step_count(int sid) const {
  return static_cast<std::size_t>(
      std::count_if(exec_steps.begin(), exec_steps.end(), [sid](const ExecStep& e) { return e.sid == sid; }));
}

std::size_t TiisModel::position_of(StepRef ref) const {
  // exec_steps is session-major with equal-length sessions.
  std::size_t per = exec_steps.size() / static_cast<std::size_t>(sessions);
  std::size_t pos = static_cast<std::size_t>(ref.sid - 1) * per + static_cast<std::size_t>(ref.index - 1);
  if (ref.sid < 1 || ref.index < 1 || static_cast<std::size_t>(ref.index) > per || pos >= exec_steps.size())
    throw ModelError("no step (" + std::to_string(ref.sid) + "," + std::to_string(ref.index) + ")");
  return pos;
}

std::size_t TiisModel::agent_index(const AgentId& a) const {
  auto it = std::find(agents.begin(), agents.end(), a);
  if (it == agents.end()) throw ModelError("unknown agent '" + a + "'");
  return static_cast<std::size_t>(it - agents.begin());
}

std::vector<TermId> TiisModel::secret_ids() const {
  std::vector<TermId> out;
  for (int sid = 1; sid <= sessions; ++sid) {
    if (goal.target_sid && *goal.target_sid != sid) continue;
    std::string text = goal.secret + "#" + std::to_string(sid);
    for (TermId id = 0; id < universe.size(); ++id)
      if (universe.at(id).text() == text) out.push_back(id);
  }
  // a target session beyond k leaves nothing to protect
  bool target_absent = goal.target_sid && *goal.target_sid > sessions;
  if (out.empty() && !target_absent)
    throw ModelError("goal secret '" + goal.secret + "' does not occur in the model");
  return out;
}

TermUniverse build_universe(const std::vector<ExecStep>& steps, const std::vector<AgentId>& agents,
                            const std::vector<Term>& extra) {
  std::set<Term> terms;
  bool public_key = false;
  auto add = [&](const Term& t) {
    for (const Term& s : subterms(t)) {
      terms.insert(s);
      public_key |= s.kind() == TermKind::pub_key || s.kind() == TermKind::priv_key;
    }
  };
  for (const ExecStep& e : steps) add(e.message);
  for (const Term& t : extra) add(t);
  for (const AgentId& a : agents) terms.insert(Term::ident(a));
  if (public_key) {
    for (const AgentId& a : agents) {
      terms.insert(Term::pub_key(a));
      terms.insert(Term::priv_key(a));
    }
  }
  std::vector<Term> keys;
  for (const Term& t : terms)
    if (t.is_key()) keys.push_back(t);
  for (const Term& k : keys) terms.insert(inverse_key(k));
  return TermUniverse(terms);
}

std::set<TermId> initial_knowledge(const AgentId& agent, const ProtocolSpec& spec,
                                   const TermUniverse& universe, const std::vector<Term>& compromised) {
  (void)spec;
  std::set<TermId> out;
  for (TermId id = 0; id < universe.size(); ++id) {
    const Term& t = universe.at(id);
    switch (t.kind()) {
      case TermKind::ident:
      case TermKind::pub_key: out.insert(id); break;
      case TermKind::priv_key:
        if (t.agent() == agent) out.insert(id);
        break;
      case TermKind::sym_key:
        if (t.agent() == agent || t.agent2() == agent) out.insert(id);
        break;
      default: break;
    }
  }
  if (agent == kIntruder)
    for (const Term& c : compromised) out.insert(universe.id(c));
  return out;
}

std::vector<DerivationRule> compile_rules(const TermUniverse& universe) {
  std::vector<DerivationRule> rules;
  for (TermId id = 0; id < universe.size(); ++id) {
    const Term& t = universe.at(id);
    if (t.kind() == TermKind::pair) {
      TermId l = universe.id(t.left()), r = universe.id(t.right());
      rules.push_back({RuleKind::split_left, {id}, l});
      rules.push_back({RuleKind::split_right, {id}, r});
      rules.push_back({RuleKind::pair, {l, r}, id});
    } else if (t.kind() == TermKind::cipher) {
      TermId k = universe.id(t.key()), b = universe.id(t.body());
      Term inv = inverse_key(t.key());
      if (universe.contains(inv)) rules.push_back({RuleKind::decrypt, {id, universe.id(inv)}, b});
      rules.push_back({RuleKind::encrypt, {k, b}, id});
    }
  }
  return rules;
}

Knowledge to_knowledge(const std::set<TermId>& ids, std::size_t universe_size) {
  Knowledge k(universe_size, false);
  for (TermId id : ids) k.at(id) = true;
  return k;
}

std::set<TermId> to_set(const Knowledge& k) {
  std::set<TermId> out;
  for (TermId i = 0; i < k.size(); ++i)
    if (k[i]) out.insert(i);
  return out;
}

Knowledge closure(const Knowledge& known, const std::vector<DerivationRule>& rules) {
  Knowledge k = known;
  for (bool changed = true; changed;) {
    changed = false;
    for (const DerivationRule& r : rules) {
      if (k[r.conclusion]) continue;
      if (std::all_of(r.premises.begin(), r.premises.end(), [&](TermId p) { return k[p]; })) {
        k[r.conclusion] = true;
        changed = true;
      }
    }
  }
  return k;
}

std::set<TermId> closure(const std::set<TermId>& known, const std::vector<DerivationRule>& rules,
                         std::size_t universe_size) {
  return to_set(closure(to_knowledge(known, universe_size), rules));
}

Strata plan_strata(const TermUniverse& universe, const std::vector<DerivationRule>& rules) {
  std::set<TermId> keys;
  for (const DerivationRule& r : rules)
    if (is_decomposition(r.kind) && universe.at(r.conclusion).is_key()) keys.insert(r.conclusion);
  const std::size_t d = std::max<std::size_t>(universe.depth(), 1);
  return {d * (keys.size() + 1), d};
}

Knowledge stratified_closure(const Knowledge& known, const std::vector<DerivationRule>& rules,
                             const Strata& strata) {
  Knowledge prev = known;
  for (std::size_t d = 1; d <= strata.top(); ++d) {
    bool decompose = strata.decomposes(d);
    Knowledge next = prev;
    for (const DerivationRule& r : rules) {
      if (is_decomposition(r.kind) != decompose) continue;
      if (std::all_of(r.premises.begin(), r.premises.end(), [&](TermId p) { return prev[p]; }))
        next[r.conclusion] = true;
    }
    prev = std::move(next);
  }
  return prev;
}

bool constructible(const Knowledge& closed, const Term& t, const TermUniverse& universe) {
  if (universe.contains(t) && closed[universe.id(t)]) return true;
  switch (t.kind()) {
    case TermKind::pair:
      return constructible(closed, t.left(), universe) && constructible(closed, t.right(), universe);
    case TermKind::cipher:
      return constructible(closed, t.key(), universe) && constructible(closed, t.body(), universe);
    default: return false;
  }
}

bool constructible(const std::set<TermId>& known, const Term& t, const TiisModel& model) {
  return constructible(closure(to_knowledge(known, model.universe.size()), model.rules), t,
                       model.universe);
}

TiisModel build_model(const ProtocolSpec& spec, const Scenario& scenario, int k) {
  TiisModel m;
  m.protocol_name = spec.name;
  m.scenario_name = scenario.name;
  m.sessions = k;
  m.agents = spec.roles;
  m.agents.push_back(kIntruder);
  m.exec_steps = apply_overrides(spec, scenario, k);
  m.eavesdrop = scenario.eavesdrop;
  m.goal = spec.goal;

  Vocabulary vocab = spec.vocabulary();
  std::vector<Term> compromised;
  for (const Term& t : scenario.compromised) {
    try {
      compromised.push_back(bind_term(t, vocab));
    } catch (const Error& e) {
      throw ScenarioError(std::string("compromised term: ") + e.what());
    }
    if (const auto& c = compromised.back(); !fresh_atoms(c).empty())
      for (const Term& f : fresh_atoms(c))
        if (!f.sid()) throw ScenarioError("compromised fresh atom '" + f.text() + "' needs a session suffix");
  }

  m.universe = build_universe(m.exec_steps, m.agents, compromised);
  m.depth = m.universe.depth();
  for (const AgentId& a : m.agents)
    m.initial_knowledge[a] = initial_knowledge(a, spec, m.universe, compromised);
  m.rules = compile_rules(m.universe);
  m.strata = plan_strata(m.universe, m.rules);

  for (const auto& [fresh, ref] : generation_steps(m.exec_steps)) m.generation[m.universe.id(fresh)] = ref;
  for (const Term& t : compromised)
    for (const Term& f : fresh_atoms(t))
      if (!m.generation.count(m.universe.id(f)))
        throw ModelError("orphan fresh term '" + f.text() + "' appears in no step");

  if (spec.goal.require_complete) {
    for (int sid : *spec.goal.require_complete)
      if (sid <= k) m.require_complete.insert(sid);
  } else {
    for (const ExecStep& e : m.exec_steps)
      if (e.receiver != kIntruder) m.require_complete.insert(e.sid);
  }
  m.secret_ids();  // validates the goal against the universe
  return m;
}

std::vector<std::string> honest_decryptability_warnings(const TiisModel& model) {
  std::vector<std::string> warnings;
  const std::size_t n = model.universe.size();
  std::map<AgentId, Knowledge> known;
  for (const AgentId& a : model.agents) known[a] = to_knowledge(model.initial_knowledge.at(a), n);
  for (const ExecStep& e : model.exec_steps) {
    if (e.receiver == kIntruder || e.sender == kIntruder) continue;
    Knowledge& k = known[e.receiver];
    k[model.universe.id(e.message)] = true;
    k = closure(k, model.rules);
    for (const Term& c : subterms(e.message)) {
      if (c.kind() != TermKind::cipher) continue;
      const Term& key = c.key();
      bool addressed = (key.kind() == TermKind::pub_key && key.agent() == e.receiver) ||
                       (key.kind() == TermKind::sym_key &&
                        (key.agent() == e.receiver || key.agent2() == e.receiver));
      if (addressed && !k[model.universe.id(c.body())])
        warnings.push_back("step (" + std::to_string(e.sid) + "," + std::to_string(e.index) + "): " +
                           e.receiver + " cannot open " + c.text());
    }
  }
  return warnings;
}

}  // namespace tspbmc
