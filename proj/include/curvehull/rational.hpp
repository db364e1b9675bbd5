#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <string>
#include <string_view>

#include "curvehull/errors.hpp"

namespace curvehull {

using Rational = mpq_class;

/// Renders p/q in lowest terms ("3", "-1/2").
inline std::string to_string(const Rational& q) {
  Rational c = q;
  c.canonicalize();
  return c.get_str();
}

inline double to_double(const Rational& q) { return q.get_d(); }

/// Exact binary value of a double.
inline Rational from_double(double v) {
  if (!std::isfinite(v)) throw DomainError("cannot convert non-finite value to a rational");
  return Rational(v);
}

/// Nearest rational with the given denominator.
inline Rational round_to(double v, long denominator) {
  if (!std::isfinite(v)) throw DomainError("cannot convert non-finite value to a rational");
  Rational q(static_cast<long>(std::llround(v * static_cast<double>(denominator))), denominator);
  q.canonicalize();
  return q;
}

/// Parses "7", "-3/4", "1.25", "2.5e-3" exactly.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (s.empty()) throw StructuralError("empty rational literal");

  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational q;
    try {
      q = Rational(mpz_class(s.substr(0, slash), 10), mpz_class(s.substr(slash + 1), 10));
    } catch (const std::invalid_argument&) {
      throw StructuralError("malformed rational literal '" + s + "'");
    }
    if (q.get_den() == 0) throw DomainError("zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
  }

  bool negative = false;
  size_t pos = 0;
  if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
  std::string digits;
  long exponent = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) --exponent;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw StructuralError("malformed number '" + s + "'");
  if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
    ++pos;
    try {
      size_t used = 0;
      exponent += std::stol(s.substr(pos), &used);
      pos += used;
    } catch (const std::exception&) {
      throw StructuralError("malformed exponent in '" + s + "'");
    }
  }
  if (pos != s.size()) throw StructuralError("malformed number '" + s + "'");

  mpz_class mantissa(digits, 10);  // base given: a leading 0 would otherwise mean octal
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exponent)));
  Rational q = exponent >= 0 ? Rational(mantissa * scale) : Rational(mantissa, scale);
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

}  // namespace curvehull
