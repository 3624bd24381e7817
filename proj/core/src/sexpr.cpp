#include "tspbmc/sexpr.hpp"

#include <cctype>

#include "tspbmc/error.hpp"

namespace tspbmc {

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  bool at_end() {
    skip();
    return pos_ >= text_.size();
  }

  SExpr read() {
    skip();
    if (pos_ >= text_.size()) throw Error("unexpected end of S-expression");
    char c = text_[pos_];
    if (c == ')') throw Error("unbalanced ')' at offset " + std::to_string(pos_));
    if (c == '(') {
      ++pos_;
      SExpr e;
      e.is_list = true;
      for (;;) {
        skip();
        if (pos_ >= text_.size()) throw Error("unterminated list");
        if (text_[pos_] == ')') {
          ++pos_;
          return e;
        }
        e.list.push_back(read());
      }
    }
    SExpr e;
    if (c == '|') {
      std::size_t end = text_.find('|', pos_ + 1);
      if (end == std::string_view::npos) throw Error("unterminated quoted symbol");
      e.atom = std::string(text_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      return e;
    }
    if (c == '"') {
      std::size_t i = pos_ + 1;
      std::string s;
      for (; i < text_.size(); ++i) {
        if (text_[i] == '"') {
          if (i + 1 < text_.size() && text_[i + 1] == '"') {
            s += '"';
            ++i;
            continue;
          }
          break;
        }
        s += text_[i];
      }
      if (i >= text_.size()) throw Error("unterminated string literal");
      pos_ = i + 1;
      e.atom = "\"" + s + "\"";
      return e;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')')
      ++pos_;
    e.atom = std::string(text_.substr(start, pos_ - start));
    return e;
  }

 private:
  void skip() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else if (text_[pos_] == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

SExpr parse_sexpr(std::string_view text) {
  Reader r(text);
  SExpr e = r.read();
  if (!r.at_end()) throw Error("trailing input after S-expression");
  return e;
}

std::vector<SExpr> parse_sexprs(std::string_view text) {
  Reader r(text);
  std::vector<SExpr> out;
  while (!r.at_end()) out.push_back(r.read());
  return out;
}

std::string print_sexpr(const SExpr& e) {
  if (e.is_atom()) return e.atom;
  std::string out = "(";
  for (std::size_t i = 0; i < e.list.size(); ++i) {
    if (i) out += ' ';
    out += print_sexpr(e.list[i]);
  }
  return out + ")";
}

bool sexpr_complete(std::string_view text) {
  int depth = 0;
  bool seen = false;
  bool in_quote = false;
  for (char c : text) {
    if (in_quote) {
      if (c == '|') in_quote = false;
      continue;
    }
    if (c == '|') in_quote = true;
    else if (c == '(') {
      ++depth;
      seen = true;
    } else if (c == ')') {
      if (--depth == 0 && seen) return true;
    } else if (depth == 0) {
      // a top-level atom is complete once whitespace follows it
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (seen) return true;
      } else {
        seen = true;
      }
    }
  }
  return false;
}

Rational sexpr_to_rational(const SExpr& e) {
  if (e.is_atom()) return parse_rational(e.atom);
  if (e.list.size() == 2 && e.list[0].is_atom() && e.list[0].atom == "-")
    return -sexpr_to_rational(e.list[1]);
  if (e.list.size() == 3 && e.list[0].is_atom() && e.list[0].atom == "/") {
    Rational den = sexpr_to_rational(e.list[2]);
    if (den == Rational(0)) throw Error("division by zero in model value");
    return sexpr_to_rational(e.list[1]) / den;
  }
  throw Error("not a rational value: " + print_sexpr(e));
}

ModelValue sexpr_to_value(const SExpr& e) {
  if (e.is_atom() && e.atom == "true") return true;
  if (e.is_atom() && e.atom == "false") return false;
  return sexpr_to_rational(e);
}

SExpr rational_to_sexpr(const Rational& q) {
  return parse_sexpr(rational_to_smtlib(q));
}

}  // namespace tspbmc
