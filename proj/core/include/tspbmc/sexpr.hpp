#pragma once

// Minimal S-expression reader for solver replies such as
//   ((x true) (t_1_1 (/ 3.0 2.0)) (tau_2 (- 1.0)))

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tspbmc/rational.hpp"

namespace tspbmc {

struct SExpr {
  std::string atom;           // set when list is empty and is_list is false
  std::vector<SExpr> list;
  bool is_list = false;

  bool is_atom() const { return !is_list; }
};

/// Parses exactly one S-expression. Throws tspbmc::Error.
SExpr parse_sexpr(std::string_view text);

/// Parses a sequence of S-expressions (whitespace separated).
std::vector<SExpr> parse_sexprs(std::string_view text);

std::string print_sexpr(const SExpr& e);

/// True once `text` holds at least one balanced top-level expression.
bool sexpr_complete(std::string_view text);

using ModelValue = std::variant<bool, Rational>;

/// Integer, decimal, (/ p q) and (- x) forms, arbitrarily nested.
Rational sexpr_to_rational(const SExpr& e);
ModelValue sexpr_to_value(const SExpr& e);

/// SMT-LIB2 printing for a rational, as a solver would write it.
SExpr rational_to_sexpr(const Rational& q);

}  // namespace tspbmc
