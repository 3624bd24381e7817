#include "tspbmc/oracle.hpp"

#include <algorithm>
#include <functional>
#include <unordered_set>

#include "tspbmc/error.hpp"

namespace tspbmc {

namespace {

// Difference-bound matrix: cell (i,j) bounds x_i - x_j. Variable 0 is the
// constant zero, 1 is the current time, 2 + p is the fire time of step p.
class Zone {
 public:
  explicit Zone(std::size_t vars) : n_(vars), cells_(vars * vars) {
    for (std::size_t i = 0; i < n_; ++i) at(i, i) = Rational(0);
    // current time starts at exactly zero
    at(0, 1) = Rational(0);
    at(1, 0) = Rational(0);
  }

  void constrain(std::size_t i, std::size_t j, Rational c) {
    auto& cell = at(i, j);
    if (!cell || c < *cell) cell = c;
  }

  void free(std::size_t v) {
    for (std::size_t k = 0; k < n_; ++k) {
      if (k == v) continue;
      at(v, k).reset();
      at(k, v).reset();
    }
  }

  // Floyd-Warshall; false when the zone is empty.
  bool close() {
    for (std::size_t k = 0; k < n_; ++k)
      for (std::size_t i = 0; i < n_; ++i) {
        if (!at(i, k)) continue;
        for (std::size_t j = 0; j < n_; ++j) {
          if (!at(k, j)) continue;
          Rational via = *at(i, k) + *at(k, j);
          if (!at(i, j) || via < *at(i, j)) at(i, j) = via;
        }
      }
    for (std::size_t i = 0; i < n_; ++i)
      if (*at(i, i) < Rational(0)) return false;
    return true;
  }

  Rational lower(std::size_t v) const { return -*cells_[v]; }  // -(x_0 - x_v)

  std::string key() const {
    std::string out;
    for (const auto& c : cells_) {
      out += c ? rational_to_string(*c) : "*";
      out += ',';
    }
    return out;
  }

 private:
  std::optional<Rational>& at(std::size_t i, std::size_t j) { return cells_[i * n_ + j]; }

  std::size_t n_;
  std::vector<std::optional<Rational>> cells_;
};

struct Context {
  const TiisModel& m;
  std::size_t steps;
  std::vector<std::size_t> pred;                 // exec position of predecessor, or npos
  std::vector<std::vector<std::pair<std::size_t, Rational>>> lifetimes;  // (generation position, bound)
  std::vector<std::vector<std::size_t>> session_positions;
  std::vector<Knowledge> initial;

  static constexpr std::size_t none = static_cast<std::size_t>(-1);

  explicit Context(const TiisModel& model) : m(model), steps(model.exec_steps.size()) {
    pred.assign(steps, none);
    lifetimes.resize(steps);
    session_positions.resize(m.sessions + 1);
    for (std::size_t p = 0; p < steps; ++p) {
      const ExecStep& e = m.exec_steps[p];
      session_positions[e.sid].push_back(p);
      if (e.index > 1) pred[p] = m.position_of({e.sid, e.index - 1});
      for (const LifetimeCheck& c : e.lifetime_checks)
        lifetimes[p].emplace_back(m.position_of(m.generation.at(m.universe.id(c.fresh))), c.bound);
    }
    for (const AgentId& a : m.agents)
      initial.push_back(closure(to_knowledge(m.initial_knowledge.at(a), m.universe.size()), m.rules));
  }
};

struct State {
  std::vector<int> pc;          // per session, next step index (index 0 unused)
  std::vector<bool> fired;      // per exec position
  Zone zone;
  Knowledge intruder;
};

bool goal_holds(const Context& cx, const State& s) {
  for (int sid : cx.m.require_complete)
    if (s.pc[sid] <= static_cast<int>(cx.m.step_count(sid))) return false;
  for (TermId id : cx.m.secret_ids())
    if (s.intruder[id]) return true;
  return false;
}

// Fire time of a fired step stays relevant while its successor is unfired or
// an unfired step checks a lifetime against it.
bool relevant(const Context& cx, const State& s, std::size_t q) {
  for (std::size_t p = 0; p < cx.steps; ++p) {
    if (s.fired[p]) continue;
    if (cx.pred[p] == q) return true;
    for (const auto& [gen, bound] : cx.lifetimes[p])
      if (gen == q) return true;
  }
  return false;
}

// Applies step p to `s`. Returns false when it is not enabled. With
// `project` unset, every fire time stays in the zone (for witness times).
bool fire(const Context& cx, State& s, std::size_t p, bool project) {
  const ExecStep& e = cx.m.exec_steps[p];
  if (s.fired[p] || s.pc[e.sid] != e.index) return false;
  for (const auto& [gen, bound] : cx.lifetimes[p])
    if (!s.fired[gen]) return false;
  if (e.gated && !constructible(s.intruder, e.message, cx.m.universe)) return false;

  const std::size_t v = 2 + p;
  Zone z = s.zone;
  z.free(v);
  z.constrain(1, v, Rational(0));  // x_v >= now
  z.constrain(0, v, -e.min_delay);
  if (cx.pred[p] != Context::none) z.constrain(2 + cx.pred[p], v, -e.min_delay);
  for (const auto& [gen, bound] : cx.lifetimes[p]) z.constrain(v, 2 + gen, bound);
  if (!z.close()) return false;
  z.free(1);
  z.constrain(1, v, Rational(0));
  z.constrain(v, 1, Rational(0));
  z.close();

  s.fired[p] = true;
  ++s.pc[e.sid];
  if (project)
    for (std::size_t q = 0; q < cx.steps; ++q)
      if (s.fired[q] && !relevant(cx, s, q)) z.free(2 + q);
  s.zone = std::move(z);

  TermId msg = cx.m.universe.id(e.message);
  if ((cx.m.eavesdrop || e.receiver == kIntruder) && !s.intruder[msg]) {
    s.intruder[msg] = true;
    s.intruder = closure(s.intruder, cx.m.rules);
  }
  return true;
}

State initial_state(const Context& cx) {
  State s{std::vector<int>(cx.m.sessions + 1, 1), std::vector<bool>(cx.steps, false), Zone(cx.steps + 2),
          cx.initial.at(cx.m.agent_index(kIntruder))};
  return s;
}

// Key: pc and zone. Knowledge is a function of the fired set, which pc fixes.
std::string state_key(const State& s) {
  std::string k;
  for (int v : s.pc) k += std::to_string(v) + ".";
  return k + "|" + s.zone.key();
}

Trace build_trace(const Context& cx, const std::vector<std::size_t>& path) {
  State s = initial_state(cx);
  for (std::size_t p : path)
    if (!fire(cx, s, p, false)) throw ModelError("oracle path is not replayable");
  Trace tr;
  tr.protocol = cx.m.protocol_name;
  tr.scenario = cx.m.scenario_name;
  tr.sessions = cx.m.sessions;
  tr.bound = static_cast<int>(path.size());
  int pos = 0;
  for (std::size_t p : path) {
    const ExecStep& e = cx.m.exec_steps[p];
    TraceEvent ev;
    ev.position = ++pos;
    ev.step = e.ref();
    ev.sender = e.sender;
    ev.receiver = e.receiver;
    ev.message = e.message;
    // the lower-bound vertex of a closed zone lies inside it
    ev.time = s.zone.lower(2 + p);
    tr.events.push_back(std::move(ev));
  }
  fill_deltas(tr, cx.m);
  auto goal = evaluate_goal(tr, cx.m);
  if (!goal) throw ModelError("oracle trace does not reach the goal");
  tr.goal = *goal;
  return tr;
}

void check_depth(int depth) {
  if (depth < 1) throw ModelError("search depth must be >= 1");
}

}  // namespace

OracleResult explicit_reach(const TiisModel& model, int depth) {
  check_depth(depth);
  Context cx(model);
  struct Node {
    State state;
    std::size_t parent;
    std::size_t step;
  };
  std::vector<Node> nodes;
  nodes.push_back({initial_state(cx), Context::none, Context::none});
  std::unordered_set<std::string> seen{state_key(nodes[0].state)};
  std::vector<std::size_t> frontier{0};

  OracleResult res;
  for (int d = 1; d <= depth && !frontier.empty(); ++d) {
    std::vector<std::size_t> next;
    for (std::size_t idx : frontier) {
      for (std::size_t p = 0; p < cx.steps; ++p) {
        State s = nodes[idx].state;
        if (!fire(cx, s, p, true)) continue;
        if (!seen.insert(state_key(s)).second) continue;
        bool hit = goal_holds(cx, s);
        nodes.push_back({std::move(s), idx, p});
        std::size_t child = nodes.size() - 1;
        if (hit) {
          std::vector<std::size_t> path;
          for (std::size_t n = child; nodes[n].parent != Context::none; n = nodes[n].parent)
            path.push_back(nodes[n].step);
          std::reverse(path.begin(), path.end());
          res.attack = true;
          res.depth = d;
          res.trace = build_trace(cx, path);
          res.states = nodes.size();
          return res;
        }
        next.push_back(child);
      }
    }
    frontier = std::move(next);
  }
  res.depth = depth;
  res.states = nodes.size();
  return res;
}

OracleResult iterative_deepening_reach(const TiisModel& model, int depth) {
  check_depth(depth);
  Context cx(model);
  OracleResult res;
  std::vector<std::size_t> path;
  std::function<bool(const State&, int)> dfs = [&](const State& s, int left) {
    if (left == 0) return false;
    for (std::size_t p = 0; p < cx.steps; ++p) {
      State t = s;
      if (!fire(cx, t, p, true)) continue;
      ++res.states;
      path.push_back(p);
      if (goal_holds(cx, t) || dfs(t, left - 1)) return true;
      path.pop_back();
    }
    return false;
  };
  State init = initial_state(cx);
  for (int d = 1; d <= depth; ++d) {
    path.clear();
    if (dfs(init, d)) {
      res.attack = true;
      res.depth = static_cast<int>(path.size());
      res.trace = build_trace(cx, path);
      return res;
    }
  }
  res.depth = depth;
  return res;
}

}  // namespace tspbmc
