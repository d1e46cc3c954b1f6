#pragma once

#include <map>
#include <string>

#include "plrc/resource_term.hpp"

namespace plrc::resource {

// Finite formal sum of resource (poly-)terms with exact rational coefficients.
// Zero coefficients are never stored; all entries are either simple terms or
// all bags (mixing the two levels is rejected).
class Combination {
  public:
    using Map = std::map<ResourcePtr, Rational, ResourceLess>;
    using const_iterator = Map::const_iterator;

    Combination() = default;

    static Combination singleton(const ResourcePtr& t, const Rational& coeff = 1);

    bool empty() const { return entries_.empty(); }
    std::size_t support_size() const { return entries_.size(); }
    // Meaningful only when non-empty: true iff the entries are bags.
    bool poly() const { return poly_; }

    const_iterator begin() const { return entries_.begin(); }
    const_iterator end() const { return entries_.end(); }

    // Coefficient of t (zero when absent).
    Rational coeff(const ResourcePtr& t) const;
    bool contains(const ResourcePtr& t) const { return entries_.count(t) != 0; }

    // Adds coeff * t, merging and dropping a resulting zero.
    void add(const ResourcePtr& t, const Rational& coeff);
    void add(const Combination& other, const Rational& scale = 1);

    Combination& operator+=(const Combination& other);
    Combination operator+(const Combination& other) const;
    Combination scaled(const Rational& factor) const;

    // Sum of all coefficients.
    Rational mass() const;

    // Structural equality of supports (not pointer identity) and coefficients.
    bool operator==(const Combination& other) const;
    bool operator!=(const Combination& other) const { return !(*this == other); }
    // Total order, usable as a map key (memoised reduction graphs etc).
    bool operator<(const Combination& other) const;

  private:
    Map entries_;
    bool poly_ = false;
};

std::string to_string(const Combination& c);

// Array of {"term", "num", "den"} objects, serialised.
std::string to_json_string(const Combination& c);

}  // namespace plrc::resource
