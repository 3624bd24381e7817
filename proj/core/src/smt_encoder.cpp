#include "tspbmc/smt_encoder.hpp"

#include <algorithm>
#include <sstream>

#include "tspbmc/error.hpp"

namespace tspbmc {

namespace smt_names {

std::string fire(int j, StepRef s) {
  return "fire_" + std::to_string(j) + "_" + std::to_string(s.sid) + "_" + std::to_string(s.index);
}

std::string done(int j, StepRef s) {
  return "done_" + std::to_string(j) + "_" + std::to_string(s.sid) + "_" + std::to_string(s.index);
}

std::string time(StepRef s) { return "t_" + std::to_string(s.sid) + "_" + std::to_string(s.index); }

std::string tau(int j) { return "tau_" + std::to_string(j); }

std::string know(const AgentId& agent, TermId tid, int j, std::size_t d) {
  return "k_" + agent + "_" + std::to_string(tid) + "_" + std::to_string(j) + "_" + std::to_string(d);
}

}  // namespace smt_names

namespace {

namespace names = smt_names;

std::string conj(const std::vector<std::string>& xs) {
  if (xs.empty()) return "true";
  if (xs.size() == 1) return xs[0];
  std::string out = "(and";
  for (const auto& x : xs) out += " " + x;
  return out + ")";
}

std::string disj(const std::vector<std::string>& xs) {
  if (xs.empty()) return "false";
  if (xs.size() == 1) return xs[0];
  std::string out = "(or";
  for (const auto& x : xs) out += " " + x;
  return out + ")";
}

// Unfolds `constructible` over the intruder's top-stratum knowledge at j.
std::string constructible_formula(const TiisModel& m, const Term& t, int j, std::size_t top) {
  std::string whole;
  if (m.universe.contains(t)) whole = names::know(kIntruder, m.universe.id(t), j, top);
  switch (t.kind()) {
    case TermKind::pair:
      return conj({constructible_formula(m, t.left(), j, top), constructible_formula(m, t.right(), j, top)});
    case TermKind::cipher: {
      std::string parts =
          conj({constructible_formula(m, t.key(), j, top), constructible_formula(m, t.body(), j, top)});
      return whole.empty() ? parts : disj({whole, parts});
    }
    default: return whole.empty() ? "false" : whole;
  }
}

class Encoder {
 public:
  Encoder(const TiisModel& m, int n) : m_(m), n_(n), top_(m.strata.top()) {}

  SmtScript run() {
    declare_all();
    interleaving();
    timing();
    lifetimes();
    knowledge();
    gating();
    goal();

    std::ostringstream out;
    out << "; bounded reachability for protocol " << m_.protocol_name << ", scenario "
        << m_.scenario_name << ", " << m_.sessions << " session(s), bound " << n_ << "\n";
    out << "(set-logic QF_LRA)\n";
    std::sort(decls_.begin(), decls_.end());
    out << "; declarations\n";
    for (const auto& [name, sort] : decls_) out << "(declare-const " << name << " " << sort << ")\n";
    out << body_.str();
    out << "(check-sat)\n";

    SmtScript s;
    s.text = out.str();
    for (const auto& d : decls_) s.symbols.push_back(d.first);
    for (int j = 1; j <= n_; ++j) s.goal_positions.push_back(j);
    s.bound = n_;
    s.top_stratum = top_;
    return s;
  }

 private:
  void assert_(const std::string& f) { body_ << "(assert " << f << ")\n"; }
  void section(const char* name) { body_ << "; " << name << "\n"; }

  std::vector<std::string> fires_at(int j) const {
    std::vector<std::string> out;
    for (const ExecStep& e : m_.exec_steps) out.push_back(names::fire(j, e.ref()));
    return out;
  }

  void declare_all() {
    for (const ExecStep& e : m_.exec_steps) {
      decls_.emplace_back(names::time(e.ref()), "Real");
      decls_.emplace_back(names::done(0, e.ref()), "Bool");
      for (int j = 1; j <= n_; ++j) {
        decls_.emplace_back(names::fire(j, e.ref()), "Bool");
        decls_.emplace_back(names::done(j, e.ref()), "Bool");
      }
    }
    for (int j = 0; j <= n_; ++j) decls_.emplace_back(names::tau(j), "Real");
    for (const AgentId& a : m_.agents) {
      for (TermId t = 0; t < m_.universe.size(); ++t) {
        decls_.emplace_back(names::know(a, t, 0, top_), "Bool");
        for (int j = 1; j <= n_; ++j)
          for (std::size_t d = 0; d <= top_; ++d) decls_.emplace_back(names::know(a, t, j, d), "Bool");
      }
    }
  }

  void interleaving() {
    section("interleaving");
    for (const ExecStep& e : m_.exec_steps) assert_("(not " + names::done(0, e.ref()) + ")");
    for (int j = 1; j <= n_; ++j) {
      auto fires = fires_at(j);
      // at most one step per position
      for (std::size_t a = 0; a < fires.size(); ++a)
        for (std::size_t b = a + 1; b < fires.size(); ++b)
          assert_("(not (and " + fires[a] + " " + fires[b] + "))");
      // positions are filled without gaps; idle positions only form a suffix
      if (j > 1) assert_("(=> " + disj(fires) + " " + disj(fires_at(j - 1)) + ")");
      for (const ExecStep& e : m_.exec_steps) {
        StepRef s = e.ref();
        assert_("(= " + names::done(j, s) + " (or " + names::done(j - 1, s) + " " + names::fire(j, s) + "))");
        std::vector<std::string> pre{"(not " + names::done(j - 1, s) + ")"};
        if (s.index > 1) pre.push_back(names::done(j - 1, {s.sid, s.index - 1}));
        for (const LifetimeCheck& c : e.lifetime_checks)
          pre.push_back(names::done(j - 1, m_.generation.at(m_.universe.id(c.fresh))));
        std::sort(pre.begin(), pre.end());
        pre.erase(std::unique(pre.begin(), pre.end()), pre.end());
        assert_("(=> " + names::fire(j, s) + " " + conj(pre) + ")");
      }
    }
  }

  void timing() {
    section("time");
    assert_("(= " + names::tau(0) + " 0.0)");
    for (int j = 1; j <= n_; ++j) {
      assert_("(>= " + names::tau(j) + " " + names::tau(j - 1) + ")");
      for (const ExecStep& e : m_.exec_steps)
        assert_("(=> " + names::fire(j, e.ref()) + " (= " + names::time(e.ref()) + " " + names::tau(j) + "))");
    }
    for (const ExecStep& e : m_.exec_steps) {
      std::string delay = rational_to_smtlib(e.min_delay);
      if (e.index > 1)
        assert_("(>= " + names::time(e.ref()) + " (+ " + names::time({e.sid, e.index - 1}) + " " + delay + "))");
      else
        assert_("(>= " + names::time(e.ref()) + " " + delay + ")");
    }
  }

  void lifetimes() {
    section("lifetimes");
    for (const ExecStep& e : m_.exec_steps) {
      for (const LifetimeCheck& c : e.lifetime_checks) {
        StepRef gen = m_.generation.at(m_.universe.id(c.fresh));
        assert_("(=> " + names::done(n_, e.ref()) + " (<= " + names::time(e.ref()) + " (+ " +
                names::time(gen) + " " + rational_to_smtlib(c.bound) + ")))");
      }
    }
  }

  void knowledge() {
    section("knowledge");
    const std::size_t u = m_.universe.size();
    for (const AgentId& a : m_.agents) {
      Knowledge init = closure(to_knowledge(m_.initial_knowledge.at(a), u), m_.rules);
      for (TermId t = 0; t < u; ++t) {
        std::string v = names::know(a, t, 0, top_);
        assert_(init[t] ? v : "(not " + v + ")");
      }
    }

    // rules grouped by conclusion, in rule order
    std::vector<std::vector<const DerivationRule*>> by_conclusion(u);
    for (const DerivationRule& r : m_.rules) by_conclusion[r.conclusion].push_back(&r);

    for (int j = 1; j <= n_; ++j) {
      for (const AgentId& a : m_.agents) {
        std::vector<std::vector<std::string>> gains(u);
        for (const ExecStep& e : m_.exec_steps) {
          bool receives = e.receiver == a || (a == kIntruder && m_.eavesdrop);
          if (receives) gains[m_.universe.id(e.message)].push_back(names::fire(j, e.ref()));
        }
        for (TermId t = 0; t < u; ++t) {
          std::vector<std::string> src{names::know(a, t, j - 1, top_)};
          src.insert(src.end(), gains[t].begin(), gains[t].end());
          assert_("(= " + names::know(a, t, j, 0) + " " + disj(src) + ")");
        }
        for (std::size_t d = 1; d <= top_; ++d) {
          bool decompose = m_.strata.decomposes(d);
          for (TermId t = 0; t < u; ++t) {
            std::vector<std::string> src{names::know(a, t, j, d - 1)};
            for (const DerivationRule* r : by_conclusion[t]) {
              if (is_decomposition(r->kind) != decompose) continue;
              std::vector<std::string> prem;
              for (TermId p : r->premises) prem.push_back(names::know(a, p, j, d - 1));
              src.push_back(conj(prem));
            }
            assert_("(= " + names::know(a, t, j, d) + " " + disj(src) + ")");
          }
        }
      }
    }
  }

  void gating() {
    section("gating");
    for (const ExecStep& e : m_.exec_steps) {
      if (!e.gated) continue;
      for (int j = 1; j <= n_; ++j)
        assert_("(=> " + names::fire(j, e.ref()) + " " + constructible_formula(m_, e.message, j - 1, top_) + ")");
    }
  }

  void goal() {
    section("goal");
    std::vector<std::string> psis;
    for (int j = 1; j <= n_; ++j) psis.push_back(goal_formula(m_, j));
    assert_(disj(psis));
  }

  const TiisModel& m_;
  int n_;
  std::size_t top_;
  std::vector<std::pair<std::string, std::string>> decls_;
  std::ostringstream body_;
};

}  // namespace

std::string goal_formula(const TiisModel& model, int j) {
  if (model.secret_ids().empty()) return "false";
  std::vector<std::string> parts;
  for (int sid : model.require_complete)
    parts.push_back(names::done(j, {sid, static_cast<int>(model.step_count(sid))}));
  std::vector<std::string> secrets;
  for (TermId id : model.secret_ids()) secrets.push_back(names::know(kIntruder, id, j, model.strata.top()));
  parts.push_back(disj(secrets));
  return conj(parts);
}

SmtScript encode(const BmcProblem& problem) {
  if (problem.bound < 1) throw ModelError("BMC bound must be >= 1");
  return Encoder(problem.model, problem.bound).run();
}

}  // namespace tspbmc
