#pragma once

#include <boost/rational.hpp>

#include <string>
#include <string_view>

namespace tspbmc {

/// Exact time value. Solver models are decoded into this type without rounding.
using Rational = boost::rational<long long>;

/// Parses "3", "-2", "0.25", "3/2". Throws tspbmc::Error on malformed input.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" form (always with a denominator, e.g. "3/1").
std::string rational_to_string(const Rational& q);

/// Short human form: "3" for integers, "3/2" otherwise.
std::string rational_to_short_string(const Rational& q);

/// SMT-LIB2 real literal: "3.0", "(/ 3.0 2.0)", "(- 1.0)".
std::string rational_to_smtlib(const Rational& q);

}  // namespace tspbmc
