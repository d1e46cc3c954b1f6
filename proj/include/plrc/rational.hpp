#pragma once

#include <optional>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace plrc {

// Exact arithmetic everywhere: probabilities, combination coefficients and
// multinomial counts are never rounded.
using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline std::string to_string(const Integer& n) { return n.str(); }

// Canonical "num/den" rendering; integers print without the "/1".
inline std::string to_string(const Rational& q) {
    if (denominator(q) == 1) return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

inline bool is_probability(const Rational& q) { return q >= 0 && q <= 1; }

// Parses "a" or "a/b" with optional sign; rejects zero denominators.
std::optional<Rational> parse_rational(const std::string& text);

Integer factorial(unsigned n);
Integer binomial(unsigned n, unsigned k);

}  // namespace plrc
