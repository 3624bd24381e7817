#include "tspbmc/rational.hpp"

#include <cctype>
#include <limits>

#include "tspbmc/error.hpp"

namespace tspbmc {

namespace {

long long parse_digits(std::string_view digits, std::string_view whole) {
  if (digits.empty()) throw Error("malformed rational '" + std::string(whole) + "'");
  long long value = 0;
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw Error("malformed rational '" + std::string(whole) + "'");
    if (value > (std::numeric_limits<long long>::max() - (c - '0')) / 10)
      throw Error("rational out of range '" + std::string(whole) + "'");
    value = value * 10 + (c - '0');
  }
  return value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  Rational result;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    long long num = parse_digits(s.substr(0, slash), text);
    long long den = parse_digits(s.substr(slash + 1), text);
    if (den == 0) throw Error("zero denominator in '" + std::string(text) + "'");
    result = Rational(num, den);
  } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
    long long whole = s.substr(0, dot).empty() ? 0 : parse_digits(s.substr(0, dot), text);
    std::string_view frac = s.substr(dot + 1);
    long long den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) {
      if (den > std::numeric_limits<long long>::max() / 10)
        throw Error("rational out of range '" + std::string(text) + "'");
      den *= 10;
    }
    long long num = frac.empty() ? 0 : parse_digits(frac, text);
    result = Rational(whole) + Rational(num, den);
  } else {
    result = Rational(parse_digits(s, text));
  }
  return negative ? -result : result;
}

std::string rational_to_string(const Rational& q) {
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

std::string rational_to_short_string(const Rational& q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return rational_to_string(q);
}

std::string rational_to_smtlib(const Rational& q) {
  long long num = q.numerator();
  bool negative = num < 0;
  std::string magnitude = std::to_string(negative ? -num : num) + ".0";
  std::string body = q.denominator() == 1
                         ? magnitude
                         : "(/ " + magnitude + " " + std::to_string(q.denominator()) + ".0)";
  return negative ? "(- " + body + ")" : body;
}

}  // namespace tspbmc
