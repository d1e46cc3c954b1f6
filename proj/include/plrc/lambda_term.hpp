#pragma once

#include <memory>
#include <set>
#include <string>

#include "plrc/rational.hpp"

namespace plrc::syntax {

class Term;
using TermPtr = std::shared_ptr<const Term>;

// Probabilistic lambda-term.  Binders use de Bruijn indices; free variables
// carry names.  Nodes are immutable and shared.
class Term {
  public:
    enum class Kind { BoundVar, FreeVar, Abs, App, Choice };

    static TermPtr bound(int index);
    static TermPtr free(std::string name);
    static TermPtr abs(TermPtr body);
    static TermPtr app(TermPtr fun, TermPtr arg);
    // Binary choice; p is the probability of the left branch, 0 <= p <= 1.
    static TermPtr choice(const Rational& p, TermPtr left, TermPtr right);

    Kind kind() const { return kind_; }
    int index() const { return index_; }
    const std::string& name() const { return name_; }
    const Rational& prob() const { return prob_; }
    const TermPtr& body() const { return a_; }
    const TermPtr& fun() const { return a_; }
    const TermPtr& arg() const { return b_; }
    const TermPtr& left() const { return a_; }
    const TermPtr& right() const { return b_; }

    unsigned size() const { return size_; }
    bool has_choice() const { return has_choice_; }

    // Total structural order (kind, then fields, children lexicographically).
    static int compare(const Term& a, const Term& b);

  private:
    Kind kind_;
    int index_ = 0;
    std::string name_;
    Rational prob_;
    TermPtr a_, b_;
    unsigned size_ = 1;
    bool has_choice_ = false;

    explicit Term(Kind k) : kind_(k) {}
};

inline bool operator==(const Term& a, const Term& b) { return Term::compare(a, b) == 0; }
inline bool operator!=(const Term& a, const Term& b) { return Term::compare(a, b) != 0; }

struct TermLess {
    bool operator()(const TermPtr& a, const TermPtr& b) const {
        return Term::compare(*a, *b) < 0;
    }
};

bool equal(const TermPtr& a, const TermPtr& b);

std::set<std::string> free_names(const TermPtr& t);

// Renders with named binders, "\x y. M" sugar and "M (+p) N" for choices.
std::string to_string(const TermPtr& t);

// Increments dangling indices (>= cutoff counted from the root) by delta.
TermPtr shift(const TermPtr& t, int delta, int cutoff = 0);

// Capture-avoiding substitution of `value` for bound index `target`; indices
// above the target are decremented (the binder is consumed).
TermPtr subst_bound(const TermPtr& t, int target, const TermPtr& value);

}  // namespace plrc::syntax
