#pragma once

#include <set>

#include "plrc/combination.hpp"
#include "plrc/lambda_term.hpp"
#include "plrc/resource_calculus.hpp"

namespace plrc::taylor {

using resource::SizeMeasure;
using syntax::TermPtr;

struct TruncationBudget {
    unsigned max_term_size = 12;
    unsigned max_bag_copies = 4;
};

// Truncated explicit Taylor expansion: the choice-tagged simple terms of the
// full expansion whose measured size fits the budget, with their exact
// rational coefficients (1/m(s) on each support term).
resource::Combination explicit_taylor(const TermPtr& t, const TruncationBudget& b,
                                      SizeMeasure measure = SizeMeasure::Tagged);

// Support of the truncated explicit expansion, computed by an independent
// set-based enumeration (no coefficients); used to cross-check the threaded
// budget of explicit_taylor.
std::set<resource::ResourcePtr, resource::ResourceLess> explicit_taylor_support(
    const TermPtr& t, const TruncationBudget& b, SizeMeasure measure = SizeMeasure::Tagged);

struct ErasedWeight {
    resource::ResourcePtr term;
    Rational weight;
};

// Removes choice tags; the weight is the product of p for each left tag and
// 1-p for each right tag.
ErasedWeight erase(const resource::ResourcePtr& t);

// Truncated generic Taylor expansion: erasure-collapse of the explicit
// expansion truncated by erased size, so every choice-free term of size
// within budget carries its full (exact) coefficient.
resource::Combination generic_taylor(const TermPtr& t, const TruncationBudget& b);

// Reference implementation by the direct inductive clauses (the choice
// clause mixes with weights p and 1-p instead of tagging).
resource::Combination generic_taylor_direct(const TermPtr& t, const TruncationBudget& b);

// Equality of generic truncations at budget b.
bool barycentric_equiv_check(const TermPtr& m, const TermPtr& n, const TruncationBudget& b);

struct TaylorNF {
    resource::Combination comb;
    Rational residual;
};

// Truncated normal form of the explicit expansion, computed by head
// reduction: resolved branches contribute their tag prefix applied to the
// recursive expansion of the head normal form.  Coefficients are exact lower
// bounds; residual bounds the mass still hidden in unresolved branches.
TaylorNF explicit_taylor_nf(const TermPtr& t, const TruncationBudget& b, unsigned fuel);

// Same recursion with the erased size measure, erased at the end: the
// truncated normal form of the generic expansion.
TaylorNF taylor_nf(const TermPtr& t, const TruncationBudget& b, unsigned fuel);

}  // namespace plrc::taylor
