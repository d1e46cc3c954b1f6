#include "plrc/rational.hpp"

#include <cctype>

namespace plrc {

std::optional<Rational> parse_rational(const std::string& text) {
    std::size_t i = 0;
    auto digits = [&](std::string& out) {
        std::size_t start = i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) out += text[i++];
        return i > start;
    };
    std::string num, den;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) num += text[i++];
    if (!digits(num)) return std::nullopt;
    if (i < text.size() && text[i] == '/') {
        ++i;
        if (!digits(den)) return std::nullopt;
    }
    if (i != text.size()) return std::nullopt;
    Integer n(num);
    Integer d = den.empty() ? Integer(1) : Integer(den);
    if (d == 0) return std::nullopt;
    return Rational(n, d);
}

Integer factorial(unsigned n) {
    Integer r = 1;
    for (unsigned i = 2; i <= n; ++i) r *= i;
    return r;
}

Integer binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    Integer r = 1;
    for (unsigned i = 0; i < k; ++i) {
        r *= n - i;
        r /= i + 1;
    }
    return r;
}

}  // namespace plrc
