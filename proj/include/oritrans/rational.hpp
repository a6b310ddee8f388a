#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>
#include <string_view>

namespace oritrans {

using Rational = boost::multiprecision::mpq_rational;

// Accepts "3", "-3/2", "0.25" (decimal, exact) and "1e-3".
Rational parse_rational(std::string_view text);

// Exact binary value of a finite double.
Rational rational_from_double(double value);

double to_double(const Rational& value);

// "p/q" in lowest terms, or "p" when q = 1.
std::string to_string(const Rational& value);

inline int sign(const Rational& value) { return value.sign(); }

}  // namespace oritrans
