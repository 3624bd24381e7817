#include "tspbmc/term.hpp"

#include <algorithm>
#include <cctype>

#include "tspbmc/error.hpp"

namespace tspbmc {

bool is_agent_name(std::string_view name) {
  if (name.empty() || !std::isupper(static_cast<unsigned char>(name[0])) || name[0] == 'K')
    return false;
  return std::all_of(name.begin() + 1, name.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::string_view to_string(FreshClass cls) {
  switch (cls) {
    case FreshClass::nonce: return "nonce";
    case FreshClass::timestamp: return "timestamp";
    case FreshClass::sesskey: return "sesskey";
  }
  return "nonce";
}

std::optional<FreshClass> fresh_class_from_string(std::string_view text) {
  if (text == "nonce") return FreshClass::nonce;
  if (text == "timestamp") return FreshClass::timestamp;
  if (text == "sesskey") return FreshClass::sesskey;
  return std::nullopt;
}

Term::Term() {
  static const std::shared_ptr<const Node> empty = std::make_shared<const Node>();
  node_ = empty;
}

Term Term::make(Node node) {
  switch (node.kind) {
    case TermKind::ident: node.text = node.name; break;
    case TermKind::pub_key: node.text = "K" + node.name; break;
    case TermKind::priv_key: node.text = "K" + node.name + "'"; break;
    case TermKind::sym_key: node.text = "K" + node.name + node.second; break;
    case TermKind::fresh:
      node.text = node.sid ? node.name + "#" + std::to_string(*node.sid) : node.name;
      break;
    case TermKind::pair: {
      const Term& l = node.children[0];
      node.text = (l.kind() == TermKind::pair ? "(" + l.text() + ")" : l.text()) + "|" +
                  node.children[1].text();
      break;
    }
    case TermKind::cipher:
      node.text = "<" + node.children[0].text() + "," + node.children[1].text() + ">";
      break;
  }
  for (const Term& c : node.children) {
    node.depth = std::max(node.depth, c.depth() + 1);
    node.nodes += c.node_count();
  }
  return Term(std::make_shared<const Node>(std::move(node)));
}

Term Term::ident(AgentId agent) {
  Node n;
  n.kind = TermKind::ident;
  n.name = std::move(agent);
  return make(std::move(n));
}

Term Term::pub_key(AgentId agent) {
  Node n;
  n.kind = TermKind::pub_key;
  n.name = std::move(agent);
  return make(std::move(n));
}

Term Term::priv_key(AgentId agent) {
  Node n;
  n.kind = TermKind::priv_key;
  n.name = std::move(agent);
  return make(std::move(n));
}

Term Term::sym_key(AgentId a, AgentId b) {
  if (b < a) std::swap(a, b);
  Node n;
  n.kind = TermKind::sym_key;
  n.name = std::move(a);
  n.second = std::move(b);
  return make(std::move(n));
}

Term Term::fresh(std::string name, AgentId owner, FreshClass cls, std::optional<int> sid) {
  Node n;
  n.kind = TermKind::fresh;
  n.name = std::move(name);
  n.second = std::move(owner);
  n.cls = cls;
  n.sid = sid;
  return make(std::move(n));
}

Term Term::pair(Term left, Term right) {
  Node n;
  n.kind = TermKind::pair;
  n.children = {std::move(left), std::move(right)};
  return make(std::move(n));
}

Term Term::cipher(Term key, Term body) {
  if (!key.is_key()) throw Error("cipher key '" + key.text() + "' is not a key");
  Node n;
  n.kind = TermKind::cipher;
  n.children = {std::move(key), std::move(body)};
  return make(std::move(n));
}

bool Term::is_key() const {
  switch (kind()) {
    case TermKind::pub_key:
    case TermKind::priv_key:
    case TermKind::sym_key: return true;
    case TermKind::fresh: return fresh_class() == FreshClass::sesskey;
    default: return false;
  }
}

namespace {

class TermParser {
 public:
  TermParser(std::string_view text, const Vocabulary* vocab) : text_(text), vocab_(vocab) {}

  Term parse() {
    skip_ws();
    if (pos_ == text_.size()) fail("empty term");
    Term t = parse_term();
    skip_ws();
    if (pos_ != text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw TermSyntaxError(what, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Term parse_term() {
    Term unit = parse_unit();
    if (accept('|')) return Term::pair(std::move(unit), parse_term());
    return unit;
  }

  Term parse_unit() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of term");
    if (accept('<')) {
      std::size_t key_pos = pos_;
      Term key = parse_term();
      expect(',');
      Term body = parse_term();
      expect('>');
      // Without declarations a fresh atom in key position is taken as a session key.
      if (!vocab_ && key.kind() == TermKind::fresh)
        key = Term::fresh(key.fresh_name(), key.owner(), FreshClass::sesskey, key.sid());
      if (!key.is_key()) {
        pos_ = key_pos;
        fail("cipher key '" + key.text() + "' is not key-form");
      }
      return Term::cipher(std::move(key), std::move(body));
    }
    if (accept('(')) {
      Term inner = parse_term();
      expect(')');
      return inner;
    }
    return parse_atom();
  }

  Term parse_atom() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (pos_ == start) fail("expected atom");
    std::string name(text_.substr(start, pos_ - start));
    bool primed = pos_ < text_.size() && text_[pos_] == '\'';
    if (primed) ++pos_;
    std::optional<int> sid;
    if (pos_ < text_.size() && text_[pos_] == '#') {
      ++pos_;
      std::size_t digits = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      std::string_view num = text_.substr(digits, pos_ - digits);
      if (num.empty() || num.size() > 6 || num[0] == '0') {
        pos_ = digits;
        fail("malformed session suffix");
      }
      sid = std::stoi(std::string(num));
    }

    bool has_lower = std::any_of(name.begin(), name.end(),
                                 [](char c) { return std::islower(static_cast<unsigned char>(c)); });
    if (has_lower) {
      if (primed) fail("fresh atom '" + name + "' cannot be primed");
      AgentId owner;
      FreshClass cls = FreshClass::nonce;
      if (vocab_) {
        auto it = vocab_->fresh.find(name);
        if (it == vocab_->fresh.end()) {
          pos_ = start;
          fail("undeclared fresh atom '" + name + "'");
        }
        owner = it->second.owner;
        cls = it->second.cls;
      }
      return Term::fresh(name, owner, cls, sid);
    }
    if (sid) fail("session suffix on non-fresh atom '" + name + "'");
    if (name[0] == 'K') {
      std::vector<AgentId> agents = split_agents(std::string_view(name).substr(1), start);
      if (agents.size() == 1)
        return primed ? Term::priv_key(agents[0]) : Term::pub_key(agents[0]);
      if (agents.size() == 2 && !primed) return Term::sym_key(agents[0], agents[1]);
      pos_ = start;
      fail("malformed key '" + name + (primed ? "'" : "") + "'");
    }
    if (primed || !is_agent_name(name)) {
      pos_ = start;
      fail("malformed identity '" + name + "'");
    }
    check_agent(name, start);
    return Term::ident(name);
  }

  std::vector<AgentId> split_agents(std::string_view s, std::size_t at) {
    std::vector<AgentId> out;
    std::size_t i = 0;
    while (i < s.size()) {
      std::size_t j = i + 1;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      std::string agent(s.substr(i, j - i));
      if (!is_agent_name(agent)) {
        pos_ = at;
        fail("malformed key agent '" + agent + "'");
      }
      check_agent(agent, at);
      out.push_back(std::move(agent));
      i = j;
    }
    return out;
  }

  void check_agent(const AgentId& agent, std::size_t at) {
    if (vocab_ && agent != kIntruder && !vocab_->agents.count(agent)) {
      pos_ = at;
      fail("unknown agent '" + agent + "'");
    }
  }

  std::string_view text_;
  const Vocabulary* vocab_;
  std::size_t pos_ = 0;
};

void collect_subterms(const Term& t, std::set<Term>& out) {
  if (!out.insert(t).second) return;
  if (!t.is_atom()) {
    collect_subterms(t.left(), out);
    collect_subterms(t.right(), out);
  }
}

}  // namespace

Term parse_term(std::string_view text, const Vocabulary* vocab) {
  return TermParser(text, vocab).parse();
}

std::set<Term> subterms(const Term& t) {
  std::set<Term> out;
  collect_subterms(t, out);
  return out;
}

Term instantiate(const Term& t, int sid) {
  switch (t.kind()) {
    case TermKind::fresh:
      if (t.sid()) return t;
      return Term::fresh(t.fresh_name(), t.owner(), t.fresh_class(), sid);
    case TermKind::pair: return Term::pair(instantiate(t.left(), sid), instantiate(t.right(), sid));
    case TermKind::cipher:
      return Term::cipher(instantiate(t.key(), sid), instantiate(t.body(), sid));
    default: return t;
  }
}

Term inverse_key(const Term& k) {
  switch (k.kind()) {
    case TermKind::pub_key: return Term::priv_key(k.agent());
    case TermKind::priv_key: return Term::pub_key(k.agent());
    case TermKind::sym_key: return k;
    case TermKind::fresh:
      if (k.fresh_class() == FreshClass::sesskey) return k;
      break;
    default: break;
  }
  throw Error("'" + k.text() + "' is not a key");
}

Term bind_term(const Term& t, const Vocabulary& vocab) { return parse_term(t.text(), &vocab); }

std::set<Term> fresh_atoms(const Term& t) {
  std::set<Term> out;
  for (const Term& s : subterms(t))
    if (s.kind() == TermKind::fresh) out.insert(s);
  return out;
}

bool contains(const Term& t, const Term& sub) {
  if (t == sub) return true;
  if (t.is_atom()) return false;
  return contains(t.left(), sub) || contains(t.right(), sub);
}

}  // namespace tspbmc
