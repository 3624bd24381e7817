#pragma once

// Cryptographic message terms: atoms, pairs and ciphertexts.
//
// Text syntax:
//   Term  := Unit ("|" Term)?          right-associative pairing
//   Unit  := "<" Term "," Term ">"     encryption, key first
//          | "(" Term ")"
//          | Atom
//   Atom  := ident | key | fresh ("#" digits)?
//
// Atom classes are decided lexically: an atom containing a lowercase letter is
// a fresh atom (`Ta`, `Kab`); `K` followed by one or two agent names is a key
// (`KB` public, `KB'` private, `KAS` shared); anything else is an agent
// identity. Agent names are an uppercase letter other than `K`, followed by
// optional digits.

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tspbmc {

using AgentId = std::string;

inline const AgentId kIntruder = "I";

/// True when `name` is a well-formed agent name.
bool is_agent_name(std::string_view name);

enum class TermKind { ident, pub_key, priv_key, sym_key, fresh, pair, cipher };

enum class FreshClass { nonce, timestamp, sesskey };

std::string_view to_string(FreshClass cls);
std::optional<FreshClass> fresh_class_from_string(std::string_view text);

/// Immutable term value. Children are shared; copying is cheap.
///
/// Equality and ordering follow the canonical rendering, so a fresh atom is
/// identified by its name and session index. Owner and class are annotations
/// filled in from the protocol declarations.
class Term {
 public:
  /// Placeholder with empty text; not produced by the parser.
  Term();

  static Term ident(AgentId agent);
  static Term pub_key(AgentId agent);
  static Term priv_key(AgentId agent);
  /// Shared key; the agent pair is stored sorted.
  static Term sym_key(AgentId a, AgentId b);
  static Term fresh(std::string name, AgentId owner, FreshClass cls,
                    std::optional<int> sid = std::nullopt);
  static Term pair(Term left, Term right);
  /// Throws tspbmc::Error if `key` is not key-form.
  static Term cipher(Term key, Term body);

  TermKind kind() const { return node_->kind; }
  bool is_atom() const { return kind() != TermKind::pair && kind() != TermKind::cipher; }
  bool is_key() const;

  /// Agent for ident/pub/priv keys, first agent for shared keys.
  const AgentId& agent() const { return node_->name; }
  /// Second agent of a shared key.
  const AgentId& agent2() const { return node_->second; }
  /// Fresh atom name (without session suffix).
  const std::string& fresh_name() const { return node_->name; }
  const AgentId& owner() const { return node_->second; }
  FreshClass fresh_class() const { return node_->cls; }
  std::optional<int> sid() const { return node_->sid; }

  const Term& left() const { return node_->children[0]; }
  const Term& right() const { return node_->children[1]; }
  const Term& key() const { return node_->children[0]; }
  const Term& body() const { return node_->children[1]; }

  /// Canonical text (cached).
  const std::string& text() const { return node_->text; }

  std::size_t depth() const { return node_->depth; }
  std::size_t node_count() const { return node_->nodes; }

  friend bool operator==(const Term& a, const Term& b) { return a.text() == b.text(); }
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
  friend bool operator<(const Term& a, const Term& b) { return a.text() < b.text(); }

 private:
  struct Node {
    TermKind kind{};
    std::string name;
    std::string second;
    FreshClass cls = FreshClass::nonce;
    std::optional<int> sid;
    std::vector<Term> children;
    std::string text;
    std::size_t depth = 0;
    std::size_t nodes = 1;
  };

  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Term make(Node node);

  std::shared_ptr<const Node> node_;
};

struct FreshDecl {
  std::string name;
  AgentId owner;
  FreshClass cls = FreshClass::nonce;
};

/// Names known to a protocol. When supplied to parse_term, identities and key
/// agents must be declared roles or `I`, and fresh atoms must be declared.
struct Vocabulary {
  std::set<AgentId> agents;
  std::map<std::string, FreshDecl> fresh;
};

/// Parses term text. Throws TermSyntaxError.
Term parse_term(std::string_view text, const Vocabulary* vocab = nullptr);

inline std::string render_term(const Term& t) { return t.text(); }

/// t together with all of its transitive components.
std::set<Term> subterms(const Term& t);

/// Gives every sid-less fresh atom the session index `sid`.
Term instantiate(const Term& t, int sid);

/// Public and private keys swap; shared and session keys are self-inverse.
/// Throws tspbmc::Error for non-key terms.
Term inverse_key(const Term& k);

/// Re-parses `t` against `vocab`, filling in fresh-atom owners and classes.
Term bind_term(const Term& t, const Vocabulary& vocab);

/// Every fresh atom occurring in `t`.
std::set<Term> fresh_atoms(const Term& t);

bool contains(const Term& t, const Term& sub);

}  // namespace tspbmc
