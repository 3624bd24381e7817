#include "tspbmc/protocol.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tspbmc/error.hpp"

namespace tspbmc {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> words(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// `#` starts a comment at line start or after whitespace; `Ta#1` is not a comment.
std::string strip_comment(const std::string& line) {
  for (std::size_t i = 0; i < line.size(); ++i)
    if (line[i] == '#' && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1]))))
      return line.substr(0, i);
  return line;
}

Rational parse_time(const std::string& text, std::size_t line) {
  try {
    Rational q = parse_rational(text);
    if (q < Rational(0)) throw ProtocolError("negative time value '" + text + "'", line);
    return q;
  } catch (const ProtocolError&) {
    throw;
  } catch (const Error& e) {
    throw ProtocolError(e.what(), line);
  }
}

}  // namespace

Vocabulary ProtocolSpec::vocabulary() const {
  Vocabulary v;
  v.agents.insert(roles.begin(), roles.end());
  for (const FreshSpec& f : fresh_decls) v.fresh[f.name] = FreshDecl{f.name, f.owner, f.cls};
  return v;
}

const FreshSpec* ProtocolSpec::find_fresh(std::string_view name) const {
  for (const FreshSpec& f : fresh_decls)
    if (f.name == name) return &f;
  return nullptr;
}

bool ProtocolSpec::is_role(std::string_view agent) const {
  return std::find(roles.begin(), roles.end(), agent) != roles.end();
}

ProtocolSpec parse_protocol(std::string_view text) {
  ProtocolSpec spec;
  bool have_goal = false;

  struct RawStep {
    int index;
    AgentId sender, receiver;
    std::string message;
    Rational delay;
    std::size_t line;
  };
  std::vector<RawStep> raw_steps;

  static const std::regex step_re(
      R"(^step\s+(\d+)\s*:\s*(\S+)\s*->\s*(\S+)\s*:\s*(.*?)(?:\s+delay\s+(\S+))?\s*$)");

  std::istringstream in{std::string(text)};
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    auto colon = body.find(':');
    if (colon == std::string::npos) throw ProtocolError("expected 'keyword: value'", lineno);
    std::string keyword = trim(std::string_view(body).substr(0, colon));
    std::string value = trim(std::string_view(body).substr(colon + 1));

    if (keyword == "name") {
      if (value.empty()) throw ProtocolError("empty protocol name", lineno);
      spec.name = value;
    } else if (keyword == "roles") {
      for (const std::string& r : words(value)) {
        if (r == kIntruder) throw ProtocolError("'I' is reserved for the intruder", lineno);
        if (!is_agent_name(r)) throw ProtocolError("malformed role name '" + r + "'", lineno);
        if (spec.is_role(r)) throw ProtocolError("duplicate role '" + r + "'", lineno);
        spec.roles.push_back(r);
      }
    } else if (keyword == "fresh") {
      // fresh: <name> by <owner> class <cls> [lifetime <q>|none]
      auto w = words(value);
      if (w.size() != 5 && w.size() != 7)
        throw ProtocolError("expected 'fresh: NAME by OWNER class CLASS [lifetime Q]'", lineno);
      if (w[1] != "by" || w[3] != "class" || (w.size() == 7 && w[5] != "lifetime"))
        throw ProtocolError("expected 'fresh: NAME by OWNER class CLASS [lifetime Q]'", lineno);
      FreshSpec f;
      f.name = w[0];
      if (!std::any_of(f.name.begin(), f.name.end(),
                       [](char c) { return std::islower(static_cast<unsigned char>(c)); }) ||
          !std::all_of(f.name.begin(), f.name.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }))
        throw ProtocolError("fresh atom name '" + f.name + "' needs a lowercase letter", lineno);
      if (spec.find_fresh(f.name)) throw ProtocolError("duplicate fresh atom '" + f.name + "'", lineno);
      f.owner = w[2];
      auto cls = fresh_class_from_string(w[4]);
      if (!cls) throw ProtocolError("unknown fresh class '" + w[4] + "'", lineno);
      f.cls = *cls;
      if (w.size() == 7 && w[6] != "none") {
        f.lifetime = parse_time(w[6], lineno);
        if (*f.lifetime <= Rational(0)) throw ProtocolError("lifetime must be positive", lineno);
      }
      spec.fresh_decls.push_back(std::move(f));
    } else if (keyword == "goal") {
      // goal: secrecy <name> sid any|<n>
      auto w = words(value);
      if (w.size() != 4 || w[0] != "secrecy" || w[2] != "sid")
        throw ProtocolError("expected 'goal: secrecy NAME sid any|N'", lineno);
      spec.goal.secret = w[1];
      if (w[3] != "any") {
        try {
          spec.goal.target_sid = std::stoi(w[3]);
        } catch (const std::exception&) {
          throw ProtocolError("bad goal session '" + w[3] + "'", lineno);
        }
        if (*spec.goal.target_sid < 1) throw ProtocolError("goal session must be >= 1", lineno);
      }
      have_goal = true;
    } else if (keyword == "complete") {
      std::set<int> sessions;
      auto w = words(value);
      if (!(w.size() == 1 && w[0] == "none")) {
        for (const std::string& s : w) {
          int sid = 0;
          try {
            sid = std::stoi(s);
          } catch (const std::exception&) {
            throw ProtocolError("bad session index '" + s + "'", lineno);
          }
          if (sid < 1) throw ProtocolError("session index must be >= 1", lineno);
          sessions.insert(sid);
        }
      }
      spec.goal.require_complete = std::move(sessions);
    } else if (keyword.rfind("step", 0) == 0) {
      std::smatch m;
      if (!std::regex_match(body, m, step_re))
        throw ProtocolError("expected 'step N: X -> Y : MESSAGE [delay Q]'", lineno);
      RawStep s;
      s.index = std::stoi(m[1].str());
      s.sender = m[2].str();
      s.receiver = m[3].str();
      s.message = m[4].str();
      s.delay = m[5].matched ? parse_time(m[5].str(), lineno) : Rational(0);
      s.line = lineno;
      raw_steps.push_back(std::move(s));
    } else {
      throw ProtocolError("unknown keyword '" + keyword + "'", lineno);
    }
  }

  if (spec.name.empty()) throw ProtocolError("missing 'name:'");
  if (spec.roles.empty()) throw ProtocolError("missing 'roles:'");
  if (!have_goal) throw ProtocolError("missing 'goal:'");
  for (const FreshSpec& f : spec.fresh_decls)
    if (!spec.is_role(f.owner))
      throw ProtocolError("owner '" + f.owner + "' of fresh atom '" + f.name + "' is not a role");
  if (!spec.find_fresh(spec.goal.secret))
    throw ProtocolError("goal secret '" + spec.goal.secret + "' is not a declared fresh atom");

  std::sort(raw_steps.begin(), raw_steps.end(),
            [](const RawStep& a, const RawStep& b) { return a.index < b.index; });
  Vocabulary vocab = spec.vocabulary();
  for (std::size_t i = 0; i < raw_steps.size(); ++i) {
    const RawStep& r = raw_steps[i];
    if (i > 0 && raw_steps[i - 1].index == r.index)
      throw ProtocolError("duplicate step index " + std::to_string(r.index), r.line);
    if (r.index != static_cast<int>(i) + 1)
      throw ProtocolError("step index gap: expected step " + std::to_string(i + 1), r.line);
    for (const AgentId& a : {r.sender, r.receiver})
      if (!spec.is_role(a)) throw ProtocolError("'" + a + "' is not a declared role", r.line);
    if (r.sender == r.receiver) throw ProtocolError("sender equals receiver", r.line);
    Term msg = [&] {
      try {
        return parse_term(r.message, &vocab);
      } catch (const Error& e) {
        throw ProtocolError(e.what(), r.line);
      }
    }();
    for (const Term& f : fresh_atoms(msg))
      if (f.sid()) throw ProtocolError("protocol templates must not carry session suffixes", r.line);
    spec.steps.push_back(ProtocolStep{r.index, r.sender, r.receiver, std::move(msg), r.delay});
  }
  if (spec.steps.empty()) throw ProtocolError("protocol has no steps");

  std::set<std::string> generated;
  for (const ProtocolStep& s : spec.steps) {
    for (const Term& f : fresh_atoms(s.message)) {
      if (generated.count(f.fresh_name())) continue;
      if (f.owner() != s.sender)
        throw ProtocolError("fresh atom '" + f.fresh_name() + "' is first sent by " + s.sender +
                            " but generated by " + f.owner() + " (step " +
                            std::to_string(s.index) + ")");
      generated.insert(f.fresh_name());
    }
  }
  return spec;
}

std::string_view to_string(OverrideKind kind) {
  switch (kind) {
    case OverrideKind::replace: return "replace";
    case OverrideKind::intruder: return "intruder";
    case OverrideKind::retime: return "retime";
  }
  return "replace";
}

namespace {

using nlohmann::json;

Rational json_rational(const json& v, const std::string& field) {
  if (v.is_number_integer()) return Rational(v.get<long long>());
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const Error& e) {
      throw ScenarioError("field '" + field + "': " + e.what());
    }
  }
  throw ScenarioError("field '" + field + "' must be an integer or a rational string");
}

int json_int(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ScenarioError("field '" + field + "' must be an integer");
  return v.get<int>();
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ScenarioError("unknown key '" + it.key() + "' in " + where);
}

Term scenario_term(const json& v, const std::string& field) {
  if (!v.is_string()) throw ScenarioError("field '" + field + "' must be a string");
  try {
    return parse_term(v.get<std::string>());
  } catch (const Error& e) {
    throw ScenarioError("field '" + field + "': " + e.what());
  }
}

}  // namespace

Scenario parse_scenario(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ScenarioError("scenario must be a JSON object");
  reject_unknown(doc, {"name", "overrides", "sessions", "eavesdrop", "compromised"}, "scenario");

  Scenario sc;
  if (!doc.contains("name") || !doc["name"].is_string() || doc["name"].get<std::string>().empty())
    throw ScenarioError("scenario needs a nonempty string 'name'");
  sc.name = doc["name"].get<std::string>();
  if (doc.contains("sessions")) {
    sc.sessions = json_int(doc["sessions"], "sessions");
    if (*sc.sessions < 1) throw ScenarioError("'sessions' must be >= 1");
  }
  if (doc.contains("eavesdrop")) {
    if (!doc["eavesdrop"].is_boolean()) throw ScenarioError("'eavesdrop' must be a boolean");
    sc.eavesdrop = doc["eavesdrop"].get<bool>();
  }
  if (doc.contains("compromised")) {
    if (!doc["compromised"].is_array()) throw ScenarioError("'compromised' must be an array");
    for (const json& t : doc["compromised"]) sc.compromised.push_back(scenario_term(t, "compromised"));
  }
  if (doc.contains("overrides")) {
    if (!doc["overrides"].is_array()) throw ScenarioError("'overrides' must be an array");
    std::set<std::pair<int, int>> seen;
    for (const json& o : doc["overrides"]) {
      if (!o.is_object()) throw ScenarioError("override must be an object");
      reject_unknown(o, {"sid", "step", "kind", "edge", "L", "delay", "lifetime"}, "override");
      Override ov;
      if (!o.contains("sid") || !o.contains("step") || !o.contains("kind"))
        throw ScenarioError("override needs 'sid', 'step' and 'kind'");
      ov.sid = json_int(o["sid"], "sid");
      ov.step = json_int(o["step"], "step");
      if (ov.sid < 1 || ov.step < 1) throw ScenarioError("'sid' and 'step' must be >= 1");
      if (!o["kind"].is_string()) throw ScenarioError("'kind' must be a string");
      std::string kind = o["kind"].get<std::string>();
      if (kind == "replace") ov.kind = OverrideKind::replace;
      else if (kind == "intruder") ov.kind = OverrideKind::intruder;
      else if (kind == "retime") ov.kind = OverrideKind::retime;
      else throw ScenarioError("unknown kind '" + kind + "'");

      if (!seen.insert({ov.sid, ov.step}).second)
        throw ScenarioError("duplicate override for (sid " + std::to_string(ov.sid) + ", step " +
                            std::to_string(ov.step) + ")");

      if (o.contains("edge")) {
        if (!o["edge"].is_string()) throw ScenarioError("'edge' must be a string");
        static const std::regex edge_re(R"(^\s*(\S+?)\s*->\s*(\S+)\s*$)");
        std::smatch m;
        std::string edge = o["edge"].get<std::string>();
        if (!std::regex_match(edge, m, edge_re) || !is_agent_name(m[1].str()) ||
            !is_agent_name(m[2].str()) || m[1].str() == m[2].str())
          throw ScenarioError("bad edge syntax '" + edge + "'");
        ov.edge_sender = m[1].str();
        ov.edge_receiver = m[2].str();
      }
      if (o.contains("L")) ov.message = scenario_term(o["L"], "L");
      if (o.contains("delay")) {
        ov.delay = json_rational(o["delay"], "delay");
        if (*ov.delay < Rational(0)) throw ScenarioError("'delay' must be non-negative");
      }
      if (o.contains("lifetime")) {
        if (!o["lifetime"].is_object()) throw ScenarioError("'lifetime' must be an object");
        for (auto it = o["lifetime"].begin(); it != o["lifetime"].end(); ++it) {
          Rational q = json_rational(it.value(), "lifetime");
          if (q <= Rational(0)) throw ScenarioError("lifetime must be positive");
          ov.lifetime_overrides[it.key()] = q;
        }
      }

      if (ov.kind == OverrideKind::retime) {
        if (ov.edge_sender || ov.message)
          throw ScenarioError("'retime' overrides take no 'edge' or 'L'");
        if (!ov.delay && ov.lifetime_overrides.empty())
          throw ScenarioError("'retime' override needs 'delay' or 'lifetime'");
      } else {
        if (!ov.edge_sender || !ov.message)
          throw ScenarioError("'" + kind + "' override needs 'edge' and 'L'");
        if (!ov.lifetime_overrides.empty())
          throw ScenarioError("'lifetime' is only allowed on 'retime' overrides");
        if (ov.kind == OverrideKind::intruder && *ov.edge_sender != kIntruder)
          throw ScenarioError("'intruder' override must be sent by I");
        if (ov.kind == OverrideKind::replace && *ov.edge_sender == kIntruder)
          throw ScenarioError("'replace' override cannot be sent by I; use kind 'intruder'");
      }
      sc.overrides.push_back(std::move(ov));
    }
  }
  return sc;
}

std::map<Term, StepRef> generation_steps(const std::vector<ExecStep>& steps) {
  std::map<Term, StepRef> by_owner;
  std::map<Term, StepRef> first_seen;
  for (const ExecStep& s : steps) {
    for (const Term& f : fresh_atoms(s.message)) {
      first_seen.emplace(f, s.ref());
      if (f.owner() == s.sender) by_owner.emplace(f, s.ref());
    }
  }
  for (auto& [f, ref] : first_seen) by_owner.emplace(f, ref);
  return by_owner;
}

std::vector<ExecStep> apply_overrides(const ProtocolSpec& spec, const Scenario& scenario, int k) {
  if (k < 1) throw ScenarioError("session count must be >= 1");
  const int n = static_cast<int>(spec.steps.size());
  Vocabulary vocab = spec.vocabulary();

  std::vector<ExecStep> out;
  out.reserve(static_cast<std::size_t>(k * n));
  for (int sid = 1; sid <= k; ++sid) {
    for (const ProtocolStep& p : spec.steps) {
      ExecStep e;
      e.sid = sid;
      e.index = p.index;
      e.sender = p.sender;
      e.receiver = p.receiver;
      e.message = instantiate(p.message, sid);
      e.min_delay = p.min_delay;
      out.push_back(std::move(e));
    }
  }

  auto instance_key = [](const std::string& name, int sid) { return name + "#" + std::to_string(sid); };
  std::map<std::string, Rational> lifetime_override;

  for (const Override& ov : scenario.overrides) {
    if (ov.sid > k || ov.step > n)
      throw ScenarioError("override (sid " + std::to_string(ov.sid) + ", step " +
                          std::to_string(ov.step) + ") is out of range for " +
                          std::to_string(k) + " session(s) of " + std::to_string(n) + " steps");
    ExecStep& e = out[static_cast<std::size_t>((ov.sid - 1) * n + (ov.step - 1))];
    if (ov.kind != OverrideKind::retime) {
      for (const AgentId& a : {*ov.edge_sender, *ov.edge_receiver})
        if (a != kIntruder && !spec.is_role(a))
          throw ScenarioError("edge names undeclared agent '" + a + "'");
      Term msg = [&] {
        try {
          return instantiate(bind_term(*ov.message, vocab), ov.sid);
        } catch (const Error& err) {
          throw ScenarioError("override (sid " + std::to_string(ov.sid) + ", step " +
                              std::to_string(ov.step) + "): " + err.what());
        }
      }();
      e.sender = *ov.edge_sender;
      e.receiver = *ov.edge_receiver;
      e.message = std::move(msg);
    }
    if (ov.delay) e.min_delay = *ov.delay;
    for (const auto& [name, q] : ov.lifetime_overrides) {
      if (!spec.find_fresh(name)) throw ScenarioError("lifetime for undeclared fresh atom '" + name + "'");
      lifetime_override[instance_key(name, ov.sid)] = q;
    }
  }

  for (ExecStep& e : out) e.gated = e.sender == kIntruder;

  auto gen = generation_steps(out);
  for (ExecStep& e : out) {
    for (const Term& f : fresh_atoms(e.message)) {
      std::optional<Rational> bound;
      if (auto it = lifetime_override.find(f.text()); it != lifetime_override.end()) bound = it->second;
      else if (const FreshSpec* decl = spec.find_fresh(f.fresh_name())) bound = decl->lifetime;
      if (!bound || gen.at(f) == e.ref()) continue;
      e.lifetime_checks.push_back(LifetimeCheck{f, *bound});
    }
  }
  return out;
}

}  // namespace tspbmc
