#include "plrc/combination.hpp"

#include <stdexcept>

#include <json.hpp>

namespace plrc::resource {

Combination Combination::singleton(const ResourcePtr& t, const Rational& coeff) {
    Combination c;
    c.add(t, coeff);
    return c;
}

Rational Combination::coeff(const ResourcePtr& t) const {
    auto it = entries_.find(t);
    return it == entries_.end() ? Rational(0) : it->second;
}

void Combination::add(const ResourcePtr& t, const Rational& coeff) {
    if (coeff == 0) return;
    if (entries_.empty()) {
        poly_ = t->is_bag();
    } else if (t->is_bag() != poly_) {
        throw std::invalid_argument("combination mixes terms and bags");
    }
    auto [it, inserted] = entries_.try_emplace(t, coeff);
    if (!inserted) {
        it->second += coeff;
        if (it->second == 0) entries_.erase(it);
    }
}

void Combination::add(const Combination& other, const Rational& scale) {
    if (scale == 0) return;
    for (const auto& [t, q] : other.entries_) add(t, q * scale);
}

Combination& Combination::operator+=(const Combination& other) {
    add(other);
    return *this;
}

Combination Combination::operator+(const Combination& other) const {
    Combination c = *this;
    c += other;
    return c;
}

Combination Combination::scaled(const Rational& factor) const {
    Combination c;
    if (factor == 0) return c;
    for (const auto& [t, q] : entries_) c.add(t, q * factor);
    return c;
}

Rational Combination::mass() const {
    Rational m = 0;
    for (const auto& [t, q] : entries_) m += q;
    return m;
}

bool Combination::operator==(const Combination& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    auto a = entries_.begin(), b = other.entries_.begin();
    for (; a != entries_.end(); ++a, ++b) {
        if (ResourceTerm::compare(*a->first, *b->first) != 0) return false;
        if (a->second != b->second) return false;
    }
    return true;
}

bool Combination::operator<(const Combination& other) const {
    auto a = entries_.begin(), b = other.entries_.begin();
    for (; a != entries_.end() && b != other.entries_.end(); ++a, ++b) {
        int c = ResourceTerm::compare(*a->first, *b->first);
        if (c != 0) return c < 0;
        if (a->second != b->second) return a->second < b->second;
    }
    return a == entries_.end() && b != other.entries_.end();
}

std::string to_string(const Combination& c) {
    if (c.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [t, q] : c) {
        if (!first) out += " + ";
        out += plrc::to_string(q) + "." + to_string(t);
        first = false;
    }
    return out;
}

std::string to_json_string(const Combination& c) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [t, q] : c) {
        arr.push_back({{"term", to_string(t)},
                       {"num", numerator(q).str()},
                       {"den", denominator(q).str()}});
    }
    return arr.dump();
}

}  // namespace plrc::resource
