#include "tspbmc/witness.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tspbmc/error.hpp"

namespace tspbmc {

namespace {

using json = nlohmann::json;

const ModelValue& value_of(const RawResult& r, const std::string& sym) {
  auto it = r.values.find(sym);
  if (it == r.values.end()) throw ModelError("solver model has no value for " + sym);
  return it->second;
}

bool bool_of(const RawResult& r, const std::string& sym) {
  const ModelValue& v = value_of(r, sym);
  if (!std::holds_alternative<bool>(v)) throw ModelError(sym + " is not Boolean in the model");
  return std::get<bool>(v);
}

Rational real_of(const RawResult& r, const std::string& sym) {
  const ModelValue& v = value_of(r, sym);
  if (!std::holds_alternative<Rational>(v)) throw ModelError(sym + " is not a real in the model");
  return std::get<Rational>(v);
}

bool goal_bits(const RawResult& r, const TiisModel& m, int j, std::size_t top) {
  for (int sid : m.require_complete)
    if (!bool_of(r, smt_names::done(j, {sid, static_cast<int>(m.step_count(sid))}))) return false;
  for (TermId id : m.secret_ids())
    if (bool_of(r, smt_names::know(kIntruder, id, j, top))) return true;
  return false;
}

// Concrete execution state used by replay and fill_deltas.
struct Run {
  const TiisModel& m;
  std::map<int, int> pc;
  std::map<AgentId, Knowledge> known;
  std::map<StepRef, Rational> times;

  explicit Run(const TiisModel& model) : m(model) {
    for (int sid = 1; sid <= m.sessions; ++sid) pc[sid] = 1;
    for (const AgentId& a : m.agents)
      known[a] = closure(to_knowledge(m.initial_knowledge.at(a), m.universe.size()), m.rules);
  }

  // Absorbs the step's message and returns the per-agent additions.
  std::map<AgentId, std::vector<Term>> absorb(const ExecStep& e) {
    std::map<AgentId, std::vector<Term>> deltas;
    TermId msg = m.universe.id(e.message);
    for (const AgentId& a : m.agents) {
      bool receives = e.receiver == a || (a == kIntruder && m.eavesdrop);
      if (!receives) continue;
      Knowledge& k = known[a];
      if (k[msg]) continue;
      Knowledge before = k;
      k[msg] = true;
      k = closure(k, m.rules);
      std::vector<Term> gained;
      for (TermId t = 0; t < k.size(); ++t)
        if (k[t] && !before[t]) gained.push_back(m.universe.at(t));
      if (!gained.empty()) deltas[a] = std::move(gained);
    }
    return deltas;
  }
};

std::string fmt_ref(StepRef s) { return "(" + std::to_string(s.sid) + "." + std::to_string(s.index) + ")"; }

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

Trace decode(const RawResult& result, const SmtScript& script, const TiisModel& model) {
  if (result.status != SolverStatus::sat) throw ModelError("decode needs a sat result");
  const std::size_t top = script.top_stratum;
  Trace tr;
  tr.protocol = model.protocol_name;
  tr.scenario = model.scenario_name;
  tr.sessions = model.sessions;
  tr.bound = script.bound;

  bool idle_seen = false;
  int goal_at = 0;
  for (int j = 1; j <= script.bound && !goal_at; ++j) {
    const ExecStep* fired = nullptr;
    for (const ExecStep& e : model.exec_steps) {
      if (!bool_of(result, smt_names::fire(j, e.ref()))) continue;
      if (fired)
        throw ModelError("position " + std::to_string(j) + " fires both " + fmt_ref(fired->ref()) + " and " +
                         fmt_ref(e.ref()));
      fired = &e;
    }
    if (!fired) {
      idle_seen = true;
    } else {
      if (idle_seen) throw ModelError("step fires at position " + std::to_string(j) + " after an idle position");
      TraceEvent ev;
      ev.position = j;
      ev.step = fired->ref();
      ev.sender = fired->sender;
      ev.receiver = fired->receiver;
      ev.message = fired->message;
      ev.time = real_of(result, smt_names::tau(j));
      for (const AgentId& a : model.agents) {
        std::vector<Term> gained;
        for (TermId t = 0; t < model.universe.size(); ++t)
          if (bool_of(result, smt_names::know(a, t, j, top)) && !bool_of(result, smt_names::know(a, t, j - 1, top)))
            gained.push_back(model.universe.at(t));
        if (!gained.empty()) ev.deltas[a] = std::move(gained);
      }
      tr.events.push_back(std::move(ev));
    }
    if (goal_bits(result, model, j, top)) goal_at = j;
  }
  if (!goal_at) throw ModelError("goal does not hold at any position of the model");
  if (tr.events.empty()) throw ModelError("goal holds before any step fires");

  int j = goal_at;
  for (TermId id : model.secret_ids()) {
    if (bool_of(result, smt_names::know(kIntruder, id, j, top))) {
      tr.goal.secret = model.universe.at(id).text();
      break;
    }
  }
  for (int sid = 1; sid <= model.sessions; ++sid)
    if (bool_of(result, smt_names::done(j, {sid, static_cast<int>(model.step_count(sid))})))
      tr.goal.completed_sessions.push_back(sid);
  return tr;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::structure: return "structure";
    case ViolationKind::session_order: return "session order";
    case ViolationKind::time_monotone: return "time monotonicity";
    case ViolationKind::delay: return "delay";
    case ViolationKind::generation: return "generation";
    case ViolationKind::lifetime: return "lifetime";
    case ViolationKind::gating: return "gating";
    case ViolationKind::knowledge: return "knowledge";
    case ViolationKind::goal: return "goal";
  }
  return "structure";
}

ReplayReport replay(const Trace& trace, const TiisModel& model) {
  auto fail = [](ViolationKind k, int pos, std::string detail) {
    return ReplayReport{false, k, pos, std::move(detail)};
  };
  if (trace.events.empty()) return fail(ViolationKind::structure, 0, "empty trace");

  Run run(model);
  int last_pos = 0;
  Rational last_time{0};
  for (const TraceEvent& ev : trace.events) {
    const int p = ev.position;
    if (p <= last_pos) return fail(ViolationKind::structure, p, "positions must increase");
    last_pos = p;
    if (ev.step.sid < 1 || ev.step.sid > model.sessions || ev.step.index < 1 ||
        ev.step.index > static_cast<int>(model.step_count(ev.step.sid)))
      return fail(ViolationKind::structure, p, "no step " + fmt_ref(ev.step) + " in the model");
    const ExecStep& e = model.step(ev.step);
    if (e.sender != ev.sender || e.receiver != ev.receiver || e.message != ev.message)
      return fail(ViolationKind::structure, p, "event does not match step " + fmt_ref(ev.step));

    int& pc = run.pc[e.sid];
    if (pc != e.index)
      return fail(ViolationKind::session_order, p,
                  fmt_ref(ev.step) + " fires while session " + std::to_string(e.sid) + " expects step " +
                      std::to_string(pc));

    if (ev.time < Rational(0) || ev.time < last_time)
      return fail(ViolationKind::time_monotone, p, "time " + rational_to_short_string(ev.time) + " goes backwards");
    last_time = ev.time;

    Rational earliest = e.min_delay;
    if (e.index > 1) earliest += run.times.at({e.sid, e.index - 1});
    if (ev.time < earliest)
      return fail(ViolationKind::delay, p,
                  "fires at " + rational_to_short_string(ev.time) + ", earliest allowed " +
                      rational_to_short_string(earliest));

    for (const LifetimeCheck& c : e.lifetime_checks) {
      StepRef gen = model.generation.at(model.universe.id(c.fresh));
      auto it = run.times.find(gen);
      if (it == run.times.end())
        return fail(ViolationKind::generation, p, c.fresh.text() + " used before its generation step " + fmt_ref(gen));
      if (ev.time > it->second + c.bound)
        return fail(ViolationKind::lifetime, p,
                    c.fresh.text() + " expired: generated at " + rational_to_short_string(it->second) +
                        ", lifetime " + rational_to_short_string(c.bound));
    }

    if (e.gated && !constructible(run.known.at(kIntruder), e.message, model.universe))
      return fail(ViolationKind::gating, p, "intruder cannot construct " + e.message.text());

    auto deltas = run.absorb(e);
    if (deltas != ev.deltas) {
      std::string detail = "knowledge after " + fmt_ref(ev.step) + " differs from the recorded deltas";
      for (const AgentId& a : model.agents) {
        auto want = deltas.count(a) ? deltas.at(a) : std::vector<Term>{};
        auto got = ev.deltas.count(a) ? ev.deltas.at(a) : std::vector<Term>{};
        if (want != got) {
          detail += " for agent " + a + ":";
          for (const Term& t : want)
            if (std::find(got.begin(), got.end(), t) == got.end()) detail += " missing " + t.text();
          for (const Term& t : got)
            if (std::find(want.begin(), want.end(), t) == want.end()) detail += " unexpected " + t.text();
          break;
        }
      }
      return fail(ViolationKind::knowledge, p, detail);
    }
    run.times[ev.step] = ev.time;
    ++pc;
  }

  auto goal = evaluate_goal(trace, model);
  if (!goal) return fail(ViolationKind::goal, last_pos, "goal does not hold after the final event");
  bool secret_known = false;
  for (TermId id : model.secret_ids())
    if (model.universe.at(id).text() == trace.goal.secret) secret_known = run.known.at(kIntruder)[id];
  if (!secret_known)
    return fail(ViolationKind::goal, last_pos, "intruder does not know claimed secret " + trace.goal.secret);
  if (goal->completed_sessions != trace.goal.completed_sessions)
    return fail(ViolationKind::goal, last_pos, "completed session set differs");
  return {};
}

void fill_deltas(Trace& trace, const TiisModel& model) {
  Run run(model);
  for (TraceEvent& ev : trace.events) ev.deltas = run.absorb(model.step(ev.step));
}

std::optional<GoalWitness> evaluate_goal(const Trace& trace, const TiisModel& model) {
  Run run(model);
  std::set<StepRef> fired;
  for (const TraceEvent& ev : trace.events) {
    run.absorb(model.step(ev.step));
    fired.insert(ev.step);
  }
  GoalWitness g;
  for (int sid = 1; sid <= model.sessions; ++sid)
    if (fired.count({sid, static_cast<int>(model.step_count(sid))})) g.completed_sessions.push_back(sid);
  for (int sid : model.require_complete)
    if (!std::binary_search(g.completed_sessions.begin(), g.completed_sessions.end(), sid)) return std::nullopt;
  for (TermId id : model.secret_ids()) {
    if (run.known.at(kIntruder)[id]) {
      g.secret = model.universe.at(id).text();
      return g;
    }
  }
  return std::nullopt;
}

std::string render_text(const Trace& trace) {
  std::ostringstream out;
  out << "attack trace: protocol " << trace.protocol << ", scenario " << trace.scenario << ", "
      << trace.sessions << " session(s), bound " << trace.bound << "\n";
  for (const TraceEvent& ev : trace.events) {
    out << "[" << ev.position << "] t=" << rational_to_short_string(ev.time) << " " << fmt_ref(ev.step) << " "
        << ev.sender << " -> " << ev.receiver << " : " << ev.message.text() << "\n";
    for (const auto& [agent, terms] : ev.deltas)
      for (const Term& t : terms) out << "    +K(" << agent << "): " << t.text() << "\n";
  }
  out << "goal: I knows " << trace.goal.secret << "; completed sessions:";
  for (int sid : trace.goal.completed_sessions) out << " " << sid;
  out << "\n";
  return out.str();
}

std::string render_json(const Trace& trace) {
  json events = json::array();
  for (const TraceEvent& ev : trace.events) {
    json deltas = json::object();
    for (const auto& [agent, terms] : ev.deltas) {
      json list = json::array();
      for (const Term& t : terms) list.push_back(t.text());
      deltas[agent] = std::move(list);
    }
    events.push_back({{"position", ev.position},
                      {"sid", ev.step.sid},
                      {"step", ev.step.index},
                      {"sender", ev.sender},
                      {"receiver", ev.receiver},
                      {"message", ev.message.text()},
                      {"time", rational_to_string(ev.time)},
                      {"deltas", std::move(deltas)}});
  }
  json doc = {{"protocol", trace.protocol},
              {"scenario", trace.scenario},
              {"sessions", trace.sessions},
              {"bound", trace.bound},
              {"events", std::move(events)},
              {"goal",
               {{"secret", trace.goal.secret},
                {"known_by_intruder", trace.goal.known_by_intruder},
                {"completed_sessions", trace.goal.completed_sessions}}}};
  return doc.dump(2) + "\n";
}

Trace parse_trace_json(std::string_view json_text) {
  try {
    json doc = json::parse(json_text);
    Trace tr;
    tr.protocol = doc.at("protocol").get<std::string>();
    tr.scenario = doc.at("scenario").get<std::string>();
    tr.sessions = doc.at("sessions").get<int>();
    tr.bound = doc.at("bound").get<int>();
    for (const json& e : doc.at("events")) {
      TraceEvent ev;
      ev.position = e.at("position").get<int>();
      ev.step = {e.at("sid").get<int>(), e.at("step").get<int>()};
      ev.sender = e.at("sender").get<std::string>();
      ev.receiver = e.at("receiver").get<std::string>();
      ev.message = parse_term(e.at("message").get<std::string>());
      ev.time = parse_rational(e.at("time").get<std::string>());
      for (const auto& [agent, list] : e.at("deltas").items())
        for (const json& t : list) ev.deltas[agent].push_back(parse_term(t.get<std::string>()));
      tr.events.push_back(std::move(ev));
    }
    const json& g = doc.at("goal");
    tr.goal.secret = g.at("secret").get<std::string>();
    tr.goal.known_by_intruder = g.at("known_by_intruder").get<bool>();
    tr.goal.completed_sessions = g.at("completed_sessions").get<std::vector<int>>();
    return tr;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed witness JSON: ") + e.what());
  }
}

std::string render_html(const Trace& trace) {
  std::set<AgentId> agents;
  for (const TraceEvent& ev : trace.events) {
    agents.insert(ev.sender);
    agents.insert(ev.receiver);
    for (const auto& d : ev.deltas) agents.insert(d.first);
  }
  std::vector<AgentId> cols;
  for (const AgentId& a : agents)
    if (a != kIntruder) cols.push_back(a);
  cols.push_back(kIntruder);

  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
      << "<title>Attack trace: " << html_escape(trace.protocol) << " / " << html_escape(trace.scenario)
      << "</title>\n<style>\n"
      << "body{font-family:sans-serif;margin:2em}\n"
      << "table{border-collapse:collapse}\n"
      << "th,td{border:1px solid #999;padding:4px 8px;vertical-align:top;text-align:left}\n"
      << "th{background:#eee}\n"
      << "code{font-family:monospace}\n"
      << "td.secret{background:#fdd;font-weight:bold}\n"
      << "</style>\n</head>\n<body>\n";
  out << "<h1>Attack trace</h1>\n<p>Protocol <code>" << html_escape(trace.protocol) << "</code>, scenario <code>"
      << html_escape(trace.scenario) << "</code>, " << trace.sessions << " session(s), found at bound "
      << trace.bound << ".</p>\n";
  out << "<table>\n<tr><th>#</th><th>time</th><th>step</th><th>edge</th><th>message</th>";
  for (const AgentId& a : cols) out << "<th>new K(" << html_escape(a) << ")</th>";
  out << "</tr>\n";
  for (const TraceEvent& ev : trace.events) {
    out << "<tr><td>" << ev.position << "</td><td>" << html_escape(rational_to_short_string(ev.time))
        << "</td><td>" << fmt_ref(ev.step) << "</td><td>" << html_escape(ev.sender) << " &rarr; "
        << html_escape(ev.receiver) << "</td><td><code>" << html_escape(ev.message.text()) << "</code></td>";
    for (const AgentId& a : cols) {
      auto it = ev.deltas.find(a);
      bool secret = false;
      std::string cell;
      if (it != ev.deltas.end()) {
        for (const Term& t : it->second) {
          if (a == kIntruder && t.text() == trace.goal.secret) secret = true;
          if (!cell.empty()) cell += "<br>";
          cell += "<code>" + html_escape(t.text()) + "</code>";
        }
      }
      out << (secret ? "<td class=\"secret\">" : "<td>") << cell << "</td>";
    }
    out << "</tr>\n";
  }
  out << "</table>\n<p>Goal: <code>I</code> knows <code>" << html_escape(trace.goal.secret)
      << "</code>; completed sessions:";
  for (int sid : trace.goal.completed_sessions) out << " " << sid;
  out << ".</p>\n</body>\n</html>\n";
  return out.str();
}

}  // namespace tspbmc
